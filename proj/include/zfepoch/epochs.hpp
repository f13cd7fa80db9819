#pragma once

#include <cstddef>

#include "zfepoch/core.hpp"

namespace zfepoch {

// Times of every (out[k] < 0, out[k+1] >= 0) pair, linearly interpolated
// between the two samples.
EpochSequence detect_positive_zero_crossings(const SampledSignal& filtered);

// Negative local minima, refined by a parabola through the three samples
// around each minimum. A flat bottom (run of equal samples with larger
// neighbours on both sides) is reported at its centre.
EpochSequence detect_negative_peaks(const SampledSignal& filtered);

EpochSequence detect_epochs(const SampledSignal& filtered, EpochDetector detector);

/// Full extraction: pipeline for config.method, then config.detector.
EpochSequence extract_epochs(const SampledSignal& signal, const FilterConfig& config);

inline constexpr double kDefaultProminenceFraction = 0.05;

/// Reference epochs from an electroglottograph: negative peaks of its first
/// difference, dropping minima whose prominence is below
/// `prominence_fraction` of the largest one.
EpochSequence egg_reference_epochs(const SampledSignal& egg,
                                   double prominence_fraction = kDefaultProminenceFraction);

struct EvalReport {
  std::size_t reference_count = 0;
  std::size_t detected_count = 0;
  std::size_t matched_count = 0;
  // Over matched pairs; 0 when nothing matched.
  double mean_abs_error_s = 0.0;
  double tolerance_s = 0.0;

  double recall() const noexcept {
    return reference_count == 0
               ? 0.0
               : static_cast<double>(matched_count) / static_cast<double>(reference_count);
  }
};

// Walks the reference in time order; each reference epoch takes the nearest
// still-unmatched detection if it lies within tolerance.
EvalReport evaluate(const EpochSequence& detected, const EpochSequence& reference,
                    double tolerance_s);

}  // namespace zfepoch
