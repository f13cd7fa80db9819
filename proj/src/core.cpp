#include "zfepoch/core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace zfepoch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BadRadius: return "BadRadius";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::TrimTooLarge: return "TrimTooLarge";
    case ErrorCode::OmegaOutOfRange: return "OmegaOutOfRange";
    case ErrorCode::NotMonotonic: return "NotMonotonic";
    case ErrorCode::NoLocks: return "NoLocks";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::WatchDirMissing: return "WatchDirMissing";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), what)),
      code_(code) {}

namespace {

void check_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::NonPositiveRate,
                fmt::format("sample rate must be positive, got {}", rate));
  }
}

void check_finite(std::span<const double> xs) {
  auto bad = std::find_if(xs.begin(), xs.end(),
                          [](double v) { return !std::isfinite(v); });
  if (bad != xs.end()) {
    throw Error(ErrorCode::NonFinite,
                fmt::format("non-finite sample at index {}", bad - xs.begin()));
  }
}

}  // namespace

SampledSignal::SampledSignal(std::vector<double> samples, double sample_rate_hz,
                             double start_time_s)
    : samples_(std::move(samples)),
      sample_rate_hz_(sample_rate_hz),
      start_time_s_(start_time_s) {
  check_rate(sample_rate_hz_);
  check_finite(samples_);
}

SampledSignal SampledSignal::with_samples(std::vector<double> samples,
                                          double start_shift_s) const {
  return SampledSignal(std::move(samples), sample_rate_hz_,
                       start_time_s_ + start_shift_s);
}

SampledSignal validate_signal(std::span<const double> samples,
                              double sample_rate_hz) {
  if (samples.empty()) throw Error(ErrorCode::EmptySignal, "no samples");
  return SampledSignal(std::vector<double>(samples.begin(), samples.end()),
                       sample_rate_hz);
}

const SampledSignal& validate_signal(const SampledSignal& signal) {
  if (signal.empty()) throw Error(ErrorCode::EmptySignal, "no samples");
  check_rate(signal.sample_rate_hz());
  check_finite(signal.samples());
  return signal;
}

EpochSequence::EpochSequence(std::vector<double> times_s,
                             double source_sample_rate_hz)
    : times_(std::move(times_s)), rate_(source_sample_rate_hz) {
  check_rate(rate_);
  check_finite(times_);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (times_[i] < 0.0 || (i > 0 && !(times_[i] > times_[i - 1]))) {
      throw Error(ErrorCode::NotMonotonic,
                  fmt::format("epoch {} at {} s breaks strict ordering", i,
                              times_[i]));
    }
  }
}

EpochSequence EpochSequence::shifted(double dt_s) const {
  std::vector<double> t(times_);
  for (double& v : t) v += dt_s;
  return EpochSequence(std::move(t), rate_);
}

DeltaSequence::DeltaSequence(std::vector<double> intervals_s)
    : intervals_(std::move(intervals_s)) {
  for (double d : intervals_) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::NotMonotonic,
                  fmt::format("non-positive interval {}", d));
    }
  }
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ZFR: return "zfr";
    case Method::ZFF: return "zff";
    case Method::ZPZFR: return "zpzfr";
  }
  return "?";
}

std::string_view to_string(EpochDetector d) {
  return d == EpochDetector::PositiveZeroCrossing ? "crossing" : "negpeak";
}

std::optional<Method> parse_method(std::string_view s) {
  if (s == "zfr") return Method::ZFR;
  if (s == "zff") return Method::ZFF;
  if (s == "zpzfr" || s == "zp-zfr") return Method::ZPZFR;
  return std::nullopt;
}

std::optional<EpochDetector> parse_detector(std::string_view s) {
  if (s == "crossing") return EpochDetector::PositiveZeroCrossing;
  if (s == "negpeak") return EpochDetector::NegativePeak;
  return std::nullopt;
}

FilterConfig FilterConfig::defaults_for(Method m) {
  FilterConfig c;
  c.method = m;
  c.r = m == Method::ZFF ? 1.0 : 0.97;
  return c;
}

std::vector<std::string> validate_config(const FilterConfig& config) {
  std::vector<std::string> warnings;
  const double r = config.r;
  if (config.method == Method::ZFF) {
    // r is unused: the zff poles sit at z = 1.
  } else if (!(r > 0.0 && r < 1.0)) {
    throw Error(ErrorCode::BadRadius,
                fmt::format("{} needs 0 < r < 1, got {}", to_string(config.method), r));
  } else if (r < kRecommendedRadiusMin || r > kRecommendedRadiusMax) {
    warnings.push_back(fmt::format(
        "r={} outside recommended range [{}, {}]", r, kRecommendedRadiusMin,
        kRecommendedRadiusMax));
  }
  if (!(config.detrend_window_s > 0.0)) {
    throw Error(ErrorCode::BadConfig, "detrend window must be positive");
  }
  if (config.detrend_passes < 1 || config.detrend_passes > kMaxDetrendPasses) {
    throw Error(ErrorCode::BadConfig,
                fmt::format("detrend passes must be in [1, {}]", kMaxDetrendPasses));
  }
  if (config.effective_trim_s() < 0.0) {
    throw Error(ErrorCode::BadConfig, "trim must be non-negative");
  }
  return warnings;
}

}  // namespace zfepoch
