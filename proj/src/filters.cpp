#include "zfepoch/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace zfepoch {

namespace {

void check_radius(double r) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw Error(ErrorCode::BadRadius, fmt::format("r must be in (0, 1], got {}", r));
  }
}

void check_method(const FilterConfig& config, Method expected) {
  if (config.method != expected) {
    throw Error(ErrorCode::BadConfig,
                fmt::format("{} pipeline given a {} config", to_string(expected),
                            to_string(config.method)));
  }
  validate_config(config);
}

// One double-pole section, in place.
void resonate_in_place(std::vector<double>& x, double r) {
  const double a1 = 2.0 * r;
  const double a2 = r * r;
  double y1 = 0.0;
  double y2 = 0.0;
  for (double& v : x) {
    const double y = v + a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

// Samples of zero tail needed before (m+1) r^m, the double-pole impulse
// response envelope, falls below 1e-18.
std::size_t zero_phase_padding(double r) {
  const double log_r = std::log(r);
  std::size_t m = 0;
  while (std::log(static_cast<double>(m) + 1.0) + static_cast<double>(m) * log_r >
         std::log(1e-18)) {
    ++m;
  }
  return m;
}

SampledSignal detrend_and_trim(SampledSignal y, const FilterConfig& config) {
  for (int pass = 0; pass < config.detrend_passes; ++pass) {
    y = detrend(y, config.detrend_window_s);
  }
  return trim_ends(y, config.effective_trim_s());
}

// Window mean subtraction with direct sums, on a wide buffer.
std::vector<long double> detrend_wide(const std::vector<long double>& in, std::size_t half) {
  const std::size_t n = in.size();
  std::vector<long double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    long double sum = 0.0L;
    for (std::size_t j = lo; j <= hi; ++j) sum += in[j];
    out[i] = in[i] - sum / static_cast<long double>(hi - lo + 1);
  }
  return out;
}

SampledSignal zff_whole(const SampledSignal& signal, const FilterConfig& config) {
  SampledSignal x = config.pre_emphasis ? differentiate(signal) : signal;
  constexpr int kPairs = 2;
  // The r = 1 cascade grows cubically and the detrend subtracts nearly equal
  // numbers, so both run in extended precision.
  std::vector<long double> y(x.samples().begin(), x.samples().end());
  for (int p = 0; p < kPairs; ++p) {
    long double y1 = 0.0L;
    long double y2 = 0.0L;
    for (long double& v : y) {
      const long double out = v + 2.0L * y1 - y2;
      y2 = y1;
      y1 = out;
      v = out;
    }
  }
  const std::size_t half = detrend_half_width_for(config.detrend_window_s, x.sample_rate_hz());
  if (y.size() <= 2 * half + 1) {
    throw Error(ErrorCode::WindowTooLarge,
                fmt::format("detrend window of {} samples needs more than {} samples, got {}",
                            2 * half + 1, 2 * half + 1, y.size()));
  }
  for (int pass = 0; pass < config.detrend_passes; ++pass) y = detrend_wide(y, half);
  // At r = 1 each double-pole section has phase w - pi, a constant advance
  // of one sample; undo it in the time stamps.
  SampledSignal detrended = x.with_samples(std::vector<double>(y.begin(), y.end()),
                                           kPairs / x.sample_rate_hz());
  return trim_ends(detrended, config.effective_trim_s());
}

}  // namespace

SampledSignal differentiate(const SampledSignal& signal) {
  if (signal.size() < 2) {
    throw Error(ErrorCode::TooShort, "differentiate needs at least 2 samples");
  }
  auto in = signal.samples();
  std::vector<double> out(in.size() - 1);
  for (std::size_t k = 0; k + 1 < in.size(); ++k) out[k] = in[k + 1] - in[k];
  return signal.with_samples(std::move(out), 0.5 / signal.sample_rate_hz());
}

SampledSignal cascaded_resonator(const SampledSignal& signal, double r,
                                 int order_pairs) {
  check_radius(r);
  if (order_pairs < 1) {
    throw Error(ErrorCode::BadConfig, "order_pairs must be >= 1");
  }
  std::vector<double> x(signal.samples().begin(), signal.samples().end());
  for (int p = 0; p < order_pairs; ++p) resonate_in_place(x, r);
  return signal.with_samples(std::move(x));
}

std::size_t detrend_half_width_for(double window_s, double sample_rate_hz) {
  if (!(window_s > 0.0)) {
    throw Error(ErrorCode::BadConfig, "detrend window must be positive");
  }
  return static_cast<std::size_t>(std::lround(window_s * sample_rate_hz / 2.0));
}

SampledSignal detrend(const SampledSignal& signal, double window_s) {
  return detrend_half_width(signal,
                            detrend_half_width_for(window_s, signal.sample_rate_hz()));
}

SampledSignal detrend_half_width(const SampledSignal& signal, std::size_t half_width) {
  const std::size_t n = signal.size();
  if (n <= 2 * half_width + 1) {
    throw Error(ErrorCode::WindowTooLarge,
                fmt::format("detrend window of {} samples needs more than {} samples, got {}",
                            2 * half_width + 1, 2 * half_width + 1, n));
  }
  auto in = signal.samples();
  std::vector<double> out(n);
  // Direct window sums. A running sum would drift on the r = 1 cascade
  // output, whose magnitude grows cubically.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n - 1, i + half_width);
    const double sum = std::accumulate(in.begin() + static_cast<std::ptrdiff_t>(lo),
                                       in.begin() + static_cast<std::ptrdiff_t>(hi + 1), 0.0);
    out[i] = in[i] - sum / static_cast<double>(hi - lo + 1);
  }
  return signal.with_samples(std::move(out));
}

SampledSignal trim_ends(const SampledSignal& signal, double trim_s) {
  if (trim_s < 0.0) throw Error(ErrorCode::BadConfig, "trim must be non-negative");
  if (trim_s == 0.0) return signal;
  if (!(signal.duration_s() > 2.0 * trim_s)) {
    throw Error(ErrorCode::TrimTooLarge,
                fmt::format("cannot trim {} s from each end of a {} s signal", trim_s,
                            signal.duration_s()));
  }
  const auto t = static_cast<std::size_t>(std::lround(trim_s * signal.sample_rate_hz()));
  auto in = signal.samples();
  if (in.size() <= 2 * t) {
    throw Error(ErrorCode::TrimTooLarge, "trim consumes the whole signal");
  }
  std::vector<double> out(in.begin() + static_cast<std::ptrdiff_t>(t),
                          in.end() - static_cast<std::ptrdiff_t>(t));
  return signal.with_samples(std::move(out),
                             static_cast<double>(t) / signal.sample_rate_hz());
}

SampledSignal zfr_pipeline(const SampledSignal& signal, const FilterConfig& config) {
  check_method(config, Method::ZFR);
  SampledSignal x = config.pre_emphasis ? differentiate(signal) : signal;
  SampledSignal y = cascaded_resonator(x, config.r, 2);
  return detrend_and_trim(std::move(y), config);
}

SampledSignal zff_pipeline(const SampledSignal& signal, const FilterConfig& config) {
  check_method(config, Method::ZFF);
  if (signal.duration_s() <= kSegmentThresholdS) return zff_whole(signal, config);

  // Segment [a, a+L) yields trimmed output covering stage indices
  // [a+T, a+L-d-T), d = 1 with the differentiator. Stepping by L-d-2T makes
  // consecutive outputs tile without gaps or overlap.
  const double fs = signal.sample_rate_hz();
  const std::size_t n = signal.size();
  const auto seg_len = static_cast<std::size_t>(std::lround(kSegmentLengthS * fs));
  const auto trim = static_cast<std::size_t>(std::lround(config.effective_trim_s() * fs));
  const std::size_t d = config.pre_emphasis ? 1 : 0;
  const std::size_t step = seg_len - d - 2 * trim;
  auto in = signal.samples();

  std::vector<double> out;
  out.reserve(n);
  double start = 0.0;
  std::size_t a = 0;
  bool first = true;
  while (true) {
    const bool last = n - a <= seg_len + seg_len / 2;
    const std::size_t b = last ? n : a + seg_len;
    SampledSignal seg(std::vector<double>(in.begin() + static_cast<std::ptrdiff_t>(a),
                                          in.begin() + static_cast<std::ptrdiff_t>(b)),
                      fs, signal.time_of(static_cast<double>(a)));
    SampledSignal y = zff_whole(seg, config);
    if (first) {
      start = y.start_time_s();
      first = false;
    }
    out.insert(out.end(), y.samples().begin(), y.samples().end());
    if (last) break;
    a += step;
  }
  return SampledSignal(std::move(out), fs, start);
}

SampledSignal zpzfr_pipeline(const SampledSignal& signal, const FilterConfig& config) {
  check_method(config, Method::ZPZFR);
  SampledSignal x = config.pre_emphasis ? differentiate(signal) : signal;
  const std::size_t n = x.size();
  // Forward pass over a zero tail long enough to hold the decayed response,
  // then the same section on the reversed sequence realizes H(z)H(1/z).
  std::vector<double> buf(x.samples().begin(), x.samples().end());
  buf.resize(n + zero_phase_padding(config.r), 0.0);
  resonate_in_place(buf, config.r);
  std::reverse(buf.begin(), buf.end());
  resonate_in_place(buf, config.r);
  std::reverse(buf.begin(), buf.end());
  buf.resize(n);
  return detrend_and_trim(x.with_samples(std::move(buf)), config);
}

SampledSignal run_pipeline(const SampledSignal& signal, const FilterConfig& config) {
  switch (config.method) {
    case Method::ZFR: return zfr_pipeline(signal, config);
    case Method::ZFF: return zff_pipeline(signal, config);
    case Method::ZPZFR: return zpzfr_pipeline(signal, config);
  }
  throw Error(ErrorCode::BadConfig, "unknown method");
}

std::vector<double> open_omega_grid(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(n + 1);
  }
  return w;
}

FrequencyResponse frequency_response(Method method, double r,
                                     std::span<const double> omega_grid) {
  if (method != Method::ZFF) check_radius(r);
  FrequencyResponse resp;
  resp.omega_rad.reserve(omega_grid.size());
  resp.magnitude.reserve(omega_grid.size());
  resp.phase_rad.reserve(omega_grid.size());
  for (double w : omega_grid) {
    if (!(w > 0.0 && w <= std::numbers::pi)) {
      throw Error(ErrorCode::OmegaOutOfRange,
                  fmt::format("omega {} outside (0, pi]", w));
    }
    double mag = 0.0;
    double phase = 0.0;
    switch (method) {
      case Method::ZFR:
      case Method::ZFF: {
        // 1 / (1 - r e^{-jw})^4; the real part 1 - r cos w stays >= 0 on
        // (0, pi], so atan2 is already continuous there.
        const double rr = method == Method::ZFF ? 1.0 : r;
        const double re = 1.0 - rr * std::cos(w);
        const double im = rr * std::sin(w);
        const double sq = re * re + im * im;
        mag = 1.0 / (sq * sq);
        phase = -4.0 * std::atan2(im, re);
        break;
      }
      case Method::ZPZFR: {
        const double den = 1.0 - 2.0 * r * std::cos(w) + r * r;
        mag = 1.0 / (den * den);
        phase = 0.0;
        break;
      }
    }
    resp.omega_rad.push_back(w);
    resp.magnitude.push_back(mag);
    resp.phase_rad.push_back(phase);
  }
  return resp;
}

std::string_view to_string(PhaseClass p) {
  switch (p) {
    case PhaseClass::Linear: return "Linear";
    case PhaseClass::Nonlinear: return "Non-linear";
    case PhaseClass::Zero: return "Linear (Zero Phase)";
  }
  return "?";
}

std::string PoleReport::summary() const {
  return fmt::format("{} & {} & {}", causal ? "Causal" : "Non-causal",
                     to_string(phase_class), stable ? "Stable" : "Unstable");
}

PoleReport pole_report(Method method, double r) {
  check_radius(r);
  PoleReport rep;
  switch (method) {
    case Method::ZFR:
      rep.poles = {{{r, 0.0}, 4}};
      rep.stable = r < 1.0;
      rep.causal = true;
      rep.phase_class = PhaseClass::Nonlinear;
      break;
    case Method::ZFF:
      rep.poles = {{{1.0, 0.0}, 4}};
      rep.stable = false;
      rep.causal = true;
      rep.phase_class = PhaseClass::Linear;
      break;
    case Method::ZPZFR:
      // Two-sided: the region of convergence is the ring r < |z| < 1/r.
      rep.poles = {{{r, 0.0}, 2}, {{1.0 / r, 0.0}, 2}};
      rep.stable = r < 1.0;
      rep.causal = false;
      rep.phase_class = PhaseClass::Zero;
      break;
  }
  return rep;
}

}  // namespace zfepoch
