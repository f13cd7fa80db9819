#include "zfepoch/lock.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <future>
#include <mutex>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "zfepoch/epochs.hpp"
#include "zfepoch/io.hpp"

namespace fs = std::filesystem;

namespace zfepoch {

std::string_view to_string(Decision d) { return d == Decision::Open ? "open" : "closed"; }

std::string_view to_string(LockPhase p) {
  switch (p) {
    case LockPhase::WaitingForLocks: return "WaitingForLocks";
    case LockPhase::Keyed: return "Keyed";
    case LockPhase::Deciding: return "Deciding";
  }
  return "?";
}

Decision decide(const SimilarityScore& score, double threshold) {
  return score.average != 0.0 && score.average >= threshold ? Decision::Open
                                                            : Decision::Closed;
}

void apply_env_overrides(LockConfig& config) {
  if (const char* dir = std::getenv(kWatchDirEnv); dir != nullptr && *dir != '\0') {
    config.watch_dir = dir;
  }
  if (const char* thr = std::getenv(kThresholdEnv); thr != nullptr && *thr != '\0') {
    try {
      config.threshold = std::stod(thr);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadConfig, fmt::format("{}='{}' is not a number", kThresholdEnv, thr));
    }
  }
}

void validate_lock_config(const LockConfig& config) {
  if (config.lock_file_count < 1) throw Error(ErrorCode::BadConfig, "need at least one lock file");
  if (!(config.threshold >= 0.0)) throw Error(ErrorCode::BadConfig, "threshold must be >= 0");
  if (!(config.poll_interval_s > 0.0)) {
    throw Error(ErrorCode::BadConfig, "poll interval must be positive");
  }
  if (!(config.match.epsilon_s > 0.0)) throw Error(ErrorCode::BadConfig, "epsilon must be positive");
  validate_config(config.method);
}

fs::path lock_file_path(const LockConfig& config, int index) {
  return config.watch_dir / fmt::format("lock{}.wav", index);
}
fs::path test_file_path(const LockConfig& config) { return config.watch_dir / "test.wav"; }
fs::path signal_file_path(const LockConfig& config, Decision d) {
  return config.watch_dir / (d == Decision::Open ? "1" : "0");
}
fs::path rejected_test_path(const LockConfig& config) {
  return config.watch_dir / "test.wav.rejected";
}

namespace {

EpochSequence epochs_from_file(const fs::path& p, const FilterConfig& method) {
  return extract_epochs(read_wav(p), method);
}

void clear_signals(const LockConfig& config) {
  std::error_code ec;
  fs::remove(signal_file_path(config, Decision::Open), ec);
  fs::remove(signal_file_path(config, Decision::Closed), ec);
}

void publish(const LockConfig& config, Decision d) {
  clear_signals(config);
  write_text_file(signal_file_path(config, d), "");
}

void check_rate(const EpochSequence& test, const EpochSequence& lock) {
  if (test.source_sample_rate_hz() != lock.source_sample_rate_hz()) {
    throw Error(ErrorCode::SampleRateMismatch,
                fmt::format("test at {} Hz, locks at {} Hz", test.source_sample_rate_hz(),
                            lock.source_sample_rate_hz()));
  }
}

}  // namespace

LockDaemon::LockDaemon(LockConfig config) : config_(std::move(config)) {
  validate_lock_config(config_);
  std::error_code ec;
  if (!fs::is_directory(config_.watch_dir, ec)) {
    throw Error(ErrorCode::WatchDirMissing,
                fmt::format("watch directory {} does not exist", config_.watch_dir.string()));
  }
}

std::optional<LockDaemon::FileStamp> LockDaemon::stamp(const fs::path& p) const {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return std::nullopt;
  FileStamp s;
  s.size = fs::file_size(p, ec);
  if (ec) return std::nullopt;
  s.mtime = fs::last_write_time(p, ec);
  if (ec) return std::nullopt;
  return s;
}

void LockDaemon::reset(const std::string& why) {
  if (phase_ != LockPhase::WaitingForLocks) spdlog::info("resetting lock: {}", why);
  phase_ = LockPhase::WaitingForLocks;
  lock_epochs_.clear();
  keyed_stamps_.clear();
  pending_lock_stamps_.clear();
  pending_test_.reset();
}

std::optional<DecisionRecord> LockDaemon::poll_once() {
  std::vector<FileStamp> stamps;
  for (int i = 1; i <= config_.lock_file_count; ++i) {
    const auto s = stamp(lock_file_path(config_, i));
    if (!s) {
      reset(fmt::format("lock{}.wav removed", i));
      return std::nullopt;
    }
    stamps.push_back(*s);
  }
  if (phase_ == LockPhase::Keyed && stamps != keyed_stamps_) reset("lock files changed");
  if (phase_ == LockPhase::WaitingForLocks && !try_key(stamps)) return std::nullopt;
  return handle_test();
}

bool LockDaemon::try_key(const std::vector<FileStamp>& stamps) {
  if (stamps != pending_lock_stamps_) {
    pending_lock_stamps_ = stamps;
    return false;
  }
  for (int i = 1; i <= config_.lock_file_count; ++i) {
    auto q = quarantined_.find(lock_file_path(config_, i).string());
    if (q != quarantined_.end() && q->second == stamps[static_cast<std::size_t>(i - 1)]) {
      return false;
    }
  }

  std::vector<std::future<EpochSequence>> jobs;
  for (int i = 1; i <= config_.lock_file_count; ++i) {
    jobs.push_back(std::async(std::launch::async, epochs_from_file, lock_file_path(config_, i),
                              config_.method));
  }
  std::vector<EpochSequence> epochs;
  bool ok = true;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const fs::path p = lock_file_path(config_, static_cast<int>(k + 1));
    try {
      epochs.push_back(jobs[k].get());
      if (k > 0) check_rate(epochs.back(), epochs.front());
    } catch (const Error& e) {
      spdlog::error("skipping {}: {}", p.string(), e.what());
      quarantined_[p.string()] = stamps[k];
      ok = false;
    }
  }
  if (!ok) return false;

  lock_epochs_ = std::move(epochs);
  keyed_stamps_ = stamps;
  phase_ = LockPhase::Keyed;
  spdlog::info("keyed with {} lock files", lock_epochs_.size());
  return true;
}

std::optional<DecisionRecord> LockDaemon::handle_test() {
  const fs::path test = test_file_path(config_);
  const auto s = stamp(test);
  if (!s) {
    pending_test_.reset();
    return std::nullopt;
  }
  if (!pending_test_ || *pending_test_ != *s) {
    if (!pending_test_) clear_signals(config_);
    pending_test_ = s;
    return std::nullopt;
  }

  phase_ = LockPhase::Deciding;
  pending_test_.reset();
  std::optional<DecisionRecord> out;
  try {
    const EpochSequence te = epochs_from_file(test, config_.method);
    check_rate(te, lock_epochs_.front());
    DecisionRecord rec;
    rec.score = confidence(te, lock_epochs_, config_.match);
    rec.decision = decide(rec.score, config_.threshold);
    publish(config_, rec.decision);
    std::error_code ec;
    fs::remove(test, ec);
    if (ec) spdlog::warn("could not delete {}: {}", test.string(), ec.message());
    spdlog::info("decision {} (average {:.4f}, threshold {})", to_string(rec.decision),
                 rec.score.average, config_.threshold);
    out = rec;
  } catch (const Error& e) {
    spdlog::error("rejecting {}: {}", test.string(), e.what());
    std::error_code ec;
    fs::rename(test, rejected_test_path(config_), ec);
    if (ec) spdlog::warn("could not quarantine {}: {}", test.string(), ec.message());
  }
  phase_ = LockPhase::Keyed;
  return out;
}

void LockDaemon::run(std::stop_token stop) {
  std::mutex m;
  std::condition_variable_any cv;
  const auto interval = std::chrono::duration<double>(config_.poll_interval_s);
  spdlog::info("watching {} every {} s", config_.watch_dir.string(), config_.poll_interval_s);
  while (!stop.stop_requested()) {
    try {
      poll_once();
    } catch (const std::exception& e) {
      spdlog::error("poll failed: {}", e.what());
    }
    // A file seen for the first time is confirmed after half an interval,
    // keeping deposit-to-decision under two intervals.
    const bool confirming =
        pending_test_.has_value() ||
        (phase_ == LockPhase::WaitingForLocks && !pending_lock_stamps_.empty());
    const auto wait = confirming ? interval / 2 : interval;
    std::unique_lock lk(m);
    cv.wait_for(lk, stop, std::chrono::duration_cast<std::chrono::milliseconds>(wait),
                [] { return false; });
  }
}

DecisionRecord run_once(const LockConfig& config) {
  validate_lock_config(config);
  std::vector<EpochSequence> locks;
  for (int i = 1; i <= config.lock_file_count; ++i) {
    const fs::path p = lock_file_path(config, i);
    if (!fs::exists(p)) {
      throw Error(ErrorCode::NoLocks, fmt::format("missing {}", p.string()));
    }
    locks.push_back(epochs_from_file(p, config.method));
    if (i > 1) check_rate(locks.back(), locks.front());
  }
  const fs::path test = test_file_path(config);
  if (!fs::exists(test)) throw Error(ErrorCode::IoFailure, fmt::format("missing {}", test.string()));
  const EpochSequence te = epochs_from_file(test, config.method);
  check_rate(te, locks.front());

  DecisionRecord rec;
  rec.score = confidence(te, locks, config.match);
  rec.decision = decide(rec.score, config.threshold);
  publish(config, rec.decision);
  fs::remove(test);
  return rec;
}

}  // namespace zfepoch
