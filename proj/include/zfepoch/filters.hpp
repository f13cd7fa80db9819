#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "zfepoch/core.hpp"

namespace zfepoch {

/// First difference x[n] = s[n] - s[n-1]. Output sample k is stamped at the
/// midpoint between input samples k and k+1. Throws TooShort below 2 samples.
SampledSignal differentiate(const SampledSignal& signal);

/// Applies `order_pairs` cascaded double-pole sections
///   y[n] = 2r y[n-1] - r^2 y[n-2] + x[n]
/// with zero initial conditions; the transfer function is (1 - r z^-1)^(-2*order_pairs).
SampledSignal cascaded_resonator(const SampledSignal& signal, double r,
                                 int order_pairs);

/// out[n] = in[n] - mean(in[n-N .. n+N]), N = round(window_s * fs / 2), with the
/// window truncated at the buffer ends. Throws WindowTooLarge unless
/// size > 2N + 1.
SampledSignal detrend(const SampledSignal& signal, double window_s);
SampledSignal detrend_half_width(const SampledSignal& signal, std::size_t half_width);

std::size_t detrend_half_width_for(double window_s, double sample_rate_hz);

/// Drops round(trim_s * fs) samples from both ends and advances start_time_s.
SampledSignal trim_ends(const SampledSignal& signal, double trim_s);

SampledSignal zfr_pipeline(const SampledSignal& signal, const FilterConfig& config);

// Signals longer than kSegmentThresholdS are run in overlapping segments to
// bound the polynomial growth of the r = 1 cascade.
SampledSignal zff_pipeline(const SampledSignal& signal, const FilterConfig& config);

SampledSignal zpzfr_pipeline(const SampledSignal& signal, const FilterConfig& config);

/// Dispatches on config.method.
SampledSignal run_pipeline(const SampledSignal& signal, const FilterConfig& config);

inline constexpr double kSegmentThresholdS = 60.0;
inline constexpr double kSegmentLengthS = 10.0;

struct FrequencyResponse {
  std::vector<double> omega_rad;
  std::vector<double> magnitude;
  // Unwrapped.
  std::vector<double> phase_rad;
};

// Analytic response of the resonator part of each method. Throws
// OmegaOutOfRange for omega outside (0, pi].
FrequencyResponse frequency_response(Method method, double r,
                                     std::span<const double> omega_grid);

// n points evenly spaced strictly inside (0, pi).
std::vector<double> open_omega_grid(std::size_t n);

enum class PhaseClass { Linear, Nonlinear, Zero };

struct Pole {
  std::complex<double> location;
  int multiplicity = 1;
};

struct PoleReport {
  std::vector<Pole> poles;
  bool stable = false;
  bool causal = false;
  PhaseClass phase_class = PhaseClass::Nonlinear;

  // "Causal & Non-linear & Stable" style summary row.
  std::string summary() const;
};

std::string_view to_string(PhaseClass p);

PoleReport pole_report(Method method, double r);

}  // namespace zfepoch
