#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "zfepoch/compare.hpp"
#include "zfepoch/core.hpp"

namespace zfepoch {

enum class Decision { Open, Closed };

std::string_view to_string(Decision d);

// Open iff the average is nonzero and reaches the threshold.
Decision decide(const SimilarityScore& score, double threshold);

struct LockConfig {
  std::filesystem::path watch_dir;
  int lock_file_count = 5;
  // ~7 with the original microphone; recalibrate (around 12) when the
  // recording chain changes.
  double threshold = 7.0;
  double poll_interval_s = 1.0;
  FilterConfig method = FilterConfig::defaults_for(Method::ZPZFR);
  MatchConfig match;
};

inline constexpr const char* kWatchDirEnv = "ZFEPOCH_WATCH_DIR";
inline constexpr const char* kThresholdEnv = "ZFEPOCH_THRESHOLD";

// Applies ZFEPOCH_WATCH_DIR / ZFEPOCH_THRESHOLD when set.
void apply_env_overrides(LockConfig& config);

void validate_lock_config(const LockConfig& config);

// Directory layout.
std::filesystem::path lock_file_path(const LockConfig& config, int index);  // 1-based
std::filesystem::path test_file_path(const LockConfig& config);
std::filesystem::path signal_file_path(const LockConfig& config, Decision d);
std::filesystem::path rejected_test_path(const LockConfig& config);

enum class LockPhase { WaitingForLocks, Keyed, Deciding };

std::string_view to_string(LockPhase p);

struct DecisionRecord {
  Decision decision = Decision::Closed;
  SimilarityScore score;
};

// Polling state machine over the watch directory. poll_once() is one loop
// iteration without the sleep; run() repeats it every poll_interval_s, or
// after half an interval while a newly seen file awaits confirmation.
//
// Files are only read once their size and mtime are unchanged across two
// consecutive polls. Lock files are never modified; the test file is deleted
// after each decision, and a new test file clears any previous signal file.
class LockDaemon {
 public:
  // Throws WatchDirMissing.
  explicit LockDaemon(LockConfig config);

  std::optional<DecisionRecord> poll_once();
  void run(std::stop_token stop);

  // Safe to read while run() is active on another thread.
  LockPhase phase() const noexcept { return phase_.load(); }
  const LockConfig& config() const noexcept { return config_; }

 private:
  struct FileStamp {
    std::uintmax_t size = 0;
    std::filesystem::file_time_type mtime{};
    friend bool operator==(const FileStamp&, const FileStamp&) = default;
  };

  std::optional<FileStamp> stamp(const std::filesystem::path& p) const;
  void reset(const std::string& why);
  bool try_key(const std::vector<FileStamp>& stamps);
  std::optional<DecisionRecord> handle_test();

  LockConfig config_;
  std::atomic<LockPhase> phase_{LockPhase::WaitingForLocks};
  std::vector<EpochSequence> lock_epochs_;
  std::vector<FileStamp> keyed_stamps_;
  std::vector<FileStamp> pending_lock_stamps_;
  std::map<std::string, FileStamp> quarantined_;
  std::optional<FileStamp> pending_test_;
};

// One key-and-decide cycle without polling or stability checks. Requires
// every lock file and the test file to exist; writes the signal file and
// deletes the test file.
DecisionRecord run_once(const LockConfig& config);

}  // namespace zfepoch
