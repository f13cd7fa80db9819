#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zfepoch {

enum class ErrorCode {
  NonFinite,
  EmptySignal,
  NonPositiveRate,
  TooShort,
  BadRadius,
  BadConfig,
  WindowTooLarge,
  TrimTooLarge,
  OmegaOutOfRange,
  NotMonotonic,
  NoLocks,
  BadSpec,
  NotWav,
  UnsupportedEncoding,
  EmptyAudio,
  SampleRateMismatch,
  IoFailure,
  WatchDirMissing,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Uniformly sampled real waveform. Immutable once built; every processing
// stage returns a new signal. start_time_s is the time of samples()[0] in
// the coordinates of the original recording, so stages that drop or shift
// samples (differentiate, trim_ends) keep epoch times comparable.
class SampledSignal {
 public:
  SampledSignal() = default;
  // Throws NonPositiveRate / NonFinite. Empty sample buffers are allowed.
  SampledSignal(std::vector<double> samples, double sample_rate_hz,
                double start_time_s = 0.0);

  std::span<const double> samples() const noexcept { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double start_time_s() const noexcept { return start_time_s_; }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }
  double time_of(double fractional_index) const noexcept {
    return start_time_s_ + fractional_index / sample_rate_hz_;
  }

  // Same rate and time origin, new samples.
  SampledSignal with_samples(std::vector<double> samples,
                             double start_shift_s = 0.0) const;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_ = 1.0;
  double start_time_s_ = 0.0;
};

// Checks every signal invariant, including non-emptiness.
SampledSignal validate_signal(std::span<const double> samples,
                              double sample_rate_hz);
const SampledSignal& validate_signal(const SampledSignal& signal);

// Epoch instants in seconds, strictly increasing and non-negative.
class EpochSequence {
 public:
  EpochSequence() = default;
  EpochSequence(std::vector<double> times_s, double source_sample_rate_hz);

  std::span<const double> times_s() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double source_sample_rate_hz() const noexcept { return rate_; }

  EpochSequence shifted(double dt_s) const;

 private:
  std::vector<double> times_;
  double rate_ = 1.0;
};

// Intervals between consecutive epochs.
class DeltaSequence {
 public:
  DeltaSequence() = default;
  explicit DeltaSequence(std::vector<double> intervals_s);

  std::span<const double> intervals_s() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  double operator[](std::size_t i) const { return intervals_[i]; }

 private:
  std::vector<double> intervals_;
};

enum class Method { ZFR, ZFF, ZPZFR };
enum class EpochDetector { PositiveZeroCrossing, NegativePeak };

std::string_view to_string(Method m);
std::string_view to_string(EpochDetector d);
std::optional<Method> parse_method(std::string_view s);
std::optional<EpochDetector> parse_detector(std::string_view s);

struct FilterConfig {
  Method method = Method::ZPZFR;
  // Resonator pole radius; forced to 1 for ZFF.
  double r = 0.97;
  double detrend_window_s = 0.015;
  int detrend_passes = 2;
  // Defaults to detrend_window_s when unset.
  std::optional<double> trim_s;
  bool pre_emphasis = true;
  EpochDetector detector = EpochDetector::PositiveZeroCrossing;

  double effective_r() const noexcept { return method == Method::ZFF ? 1.0 : r; }
  double effective_trim_s() const noexcept {
    return trim_s.value_or(detrend_window_s);
  }

  static FilterConfig defaults_for(Method m);
};

inline constexpr double kRecommendedRadiusMin = 0.95;
inline constexpr double kRecommendedRadiusMax = 0.99;
inline constexpr int kMaxDetrendPasses = 4;

// Throws BadRadius / BadConfig. Returns advisory warnings, e.g. a radius
// outside the recommended [0.95, 0.99] band.
std::vector<std::string> validate_config(const FilterConfig& config);

}  // namespace zfepoch
