#include "zfepoch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace zfepoch {

namespace {

void bad(const std::string& msg) { throw Error(ErrorCode::BadSpec, msg); }

// Integral of the piecewise linear contour, inverted segment by segment.
class PhaseMap {
 public:
  explicit PhaseMap(const std::vector<PitchPoint>& contour) : pts_(contour) {
    phase_at_.resize(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      const double dt = pts_[i].time_s - pts_[i - 1].time_s;
      phase_at_[i] = phase_at_[i - 1] + 0.5 * (pts_[i].f0_hz + pts_[i - 1].f0_hz) * dt;
    }
  }

  double phase(double t) const {
    if (t <= pts_.front().time_s) {
      return phase_at_.front() - pts_.front().f0_hz * (pts_.front().time_s - t);
    }
    if (t >= pts_.back().time_s) {
      return phase_at_.back() + pts_.back().f0_hz * (t - pts_.back().time_s);
    }
    const std::size_t i = segment_by_time(t);
    const double tau = t - pts_[i].time_s;
    return phase_at_[i] + pts_[i].f0_hz * tau + 0.5 * slope(i) * tau * tau;
  }

  double time_at(double phi) const {
    if (phi <= phase_at_.front()) {
      return pts_.front().time_s - (phase_at_.front() - phi) / pts_.front().f0_hz;
    }
    if (phi >= phase_at_.back()) {
      return pts_.back().time_s + (phi - phase_at_.back()) / pts_.back().f0_hz;
    }
    const auto it = std::upper_bound(phase_at_.begin(), phase_at_.end(), phi);
    const auto i = static_cast<std::size_t>(it - phase_at_.begin()) - 1;
    const double f = pts_[i].f0_hz;
    const double s = slope(i);
    const double d = phi - phase_at_[i];
    // Root of s/2 tau^2 + f tau - d = 0 in the cancellation-free form.
    const double tau = 2.0 * d / (f + std::sqrt(std::max(0.0, f * f + 2.0 * s * d)));
    return pts_[i].time_s + tau;
  }

  double f0(double t) const {
    if (t <= pts_.front().time_s) return pts_.front().f0_hz;
    if (t >= pts_.back().time_s) return pts_.back().f0_hz;
    const std::size_t i = segment_by_time(t);
    return pts_[i].f0_hz + slope(i) * (t - pts_[i].time_s);
  }

 private:
  std::size_t segment_by_time(double t) const {
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                               [](double v, const PitchPoint& p) { return v < p.time_s; });
    return static_cast<std::size_t>(it - pts_.begin()) - 1;
  }
  double slope(std::size_t i) const {
    return (pts_[i + 1].f0_hz - pts_[i].f0_hz) / (pts_[i + 1].time_s - pts_[i].time_s);
  }

  std::vector<PitchPoint> pts_;
  std::vector<double> phase_at_;
};

struct ResonatorCoeffs {
  double a1 = 0.0;
  double a2 = 0.0;
};

std::vector<ResonatorCoeffs> coeffs_for(const std::vector<Formant>& formants, double fs) {
  std::vector<ResonatorCoeffs> out;
  for (const Formant& f : formants) {
    const double rho = std::exp(-std::numbers::pi * f.bandwidth_hz / fs);
    const double theta = 2.0 * std::numbers::pi * f.frequency_hz / fs;
    out.push_back({2.0 * rho * std::cos(theta), rho * rho});
  }
  return out;
}

void check_formants(const std::vector<Formant>& formants, double fs) {
  for (const Formant& f : formants) {
    if (!(f.frequency_hz > 0.0 && f.frequency_hz < fs / 2.0)) {
      bad(fmt::format("formant {} Hz not below Nyquist {} Hz", f.frequency_hz, fs / 2.0));
    }
    if (!(f.bandwidth_hz > 0.0)) bad("formant bandwidth must be positive");
  }
}

}  // namespace

void validate_spec(const SynthSpec& spec) {
  const double fs = spec.sample_rate_hz;
  if (!(fs > 0.0)) bad("sample rate must be positive");
  if (!(spec.duration_s >= 0.0)) bad("duration must be non-negative");
  if (spec.pitch_contour.empty()) bad("empty pitch contour");
  for (std::size_t i = 0; i < spec.pitch_contour.size(); ++i) {
    const PitchPoint& p = spec.pitch_contour[i];
    if (!(p.f0_hz > 0.0 && p.f0_hz < fs / 2.0)) {
      bad(fmt::format("f0 {} Hz outside (0, fs/2)", p.f0_hz));
    }
    if (i > 0 && !(p.time_s > spec.pitch_contour[i - 1].time_s)) {
      bad("pitch contour times must increase");
    }
  }
  if (!(spec.jitter_fraction >= 0.0 && spec.jitter_fraction <= 0.05)) {
    bad("jitter fraction must be in [0, 0.05]");
  }
  check_formants(spec.formants, fs);
  if (spec.formant_switch) check_formants(spec.formant_switch->formants, fs);
  if (spec.noise_snr_db && !std::isfinite(*spec.noise_snr_db)) bad("SNR must be finite");
  if (spec.excitation_amplitude == 0.0) bad("excitation amplitude must be nonzero");
}

SynthResult impulse_train(const SynthSpec& spec) {
  validate_spec(spec);
  const double fs = spec.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * fs));
  std::vector<double> x(n, 0.0);
  std::vector<double> gci;

  const PhaseMap map(spec.pitch_contour);
  const double phase_end = map.phase(spec.duration_s);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  double phi = map.phase(0.0);
  while (phi < phase_end) {
    const double t = map.time_at(phi);
    const auto idx = static_cast<std::size_t>(std::lround(t * fs));
    if (idx >= n) break;
    gci.push_back(t);
    x[idx] = spec.excitation_amplitude;
    phi += 1.0 + (spec.jitter_fraction > 0.0 ? spec.jitter_fraction * unit(rng) : 0.0);
  }
  return {SampledSignal(std::move(x), fs), EpochSequence(std::move(gci), fs)};
}

SynthResult synth_voice(const SynthSpec& spec) {
  SynthResult res = impulse_train(spec);
  const double fs = spec.sample_rate_hz;
  std::vector<double> y(res.signal.samples().begin(), res.signal.samples().end());

  const auto base = coeffs_for(spec.formants, fs);
  std::vector<ResonatorCoeffs> after = base;
  std::size_t switch_at = y.size();
  if (spec.formant_switch) {
    after = coeffs_for(spec.formant_switch->formants, fs);
    switch_at = std::min(
        y.size(), static_cast<std::size_t>(std::lround(spec.formant_switch->time_s * fs)));
  }
  // Resonator states carry across the switch; the switch may change the
  // number of sections, so state is kept per section index.
  const std::size_t sections = std::max(base.size(), after.size());
  std::vector<double> s1(sections, 0.0);
  std::vector<double> s2(sections, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto& cs = i < switch_at ? base : after;
    double v = y[i];
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const double out = v + cs[k].a1 * s1[k] - cs[k].a2 * s2[k];
      s2[k] = s1[k];
      s1[k] = out;
      v = out;
    }
    y[i] = v;
  }

  if (spec.noise_snr_db && !y.empty()) {
    double power = 0.0;
    for (double v : y) power += v * v;
    power /= static_cast<double>(y.size());
    const double sigma = std::sqrt(power / std::pow(10.0, *spec.noise_snr_db / 10.0));
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : y) v += noise(rng);
  }
  res.signal = res.signal.with_samples(std::move(y));
  return res;
}

SampledSignal synth_egg(const EpochSequence& gci, double sample_rate_hz, double duration_s) {
  if (!(sample_rate_hz > 0.0)) bad("sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate_hz));
  std::vector<double> egg(n, 0.0);
  auto g = gci.times_s();
  if (g.size() < 2) return SampledSignal(std::move(egg), sample_rate_hz);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    while (k + 1 < g.size() && t >= g[k + 1]) ++k;
    if (t < g[0]) {
      // Rise into the first closure at the first period's rate.
      egg[i] = std::max(0.0, 1.0 - (g[0] - t) / (g[1] - g[0]));
    } else if (k + 1 < g.size()) {
      egg[i] = (t - g[k]) / (g[k + 1] - g[k]);
    } else {
      // After the last GCI: keep rising at the last period's rate, capped.
      egg[i] = std::min(1.0, (t - g[k]) / (g[k] - g[k - 1]));
    }
  }
  return SampledSignal(std::move(egg), sample_rate_hz);
}

SynthSpec speaker_spec(Speaker speaker, double duration_s, std::uint64_t seed,
                       double sample_rate_hz) {
  SynthSpec s;
  s.sample_rate_hz = sample_rate_hz;
  s.duration_s = duration_s;
  s.jitter_fraction = 0.01;
  const double d = std::max(duration_s, 1e-3);
  if (speaker == Speaker::A) {
    s.pitch_contour = {{0.0, 106.0}, {0.4 * d, 118.0}, {d, 104.0}};
    s.formants = {{800.0, 100.0}};
    s.seed = seed * 2 + 0x5eed0a;
  } else {
    s.pitch_contour = {{0.0, 184.0}, {0.5 * d, 198.0}, {d, 186.0}};
    s.formants = {{1100.0, 130.0}};
    s.seed = seed * 2 + 0x5eed0b;
  }
  return s;
}

}  // namespace zfepoch
