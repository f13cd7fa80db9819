#include "zfepoch/epochs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "zfepoch/filters.hpp"

namespace zfepoch {

namespace {

struct Minimum {
  double position = 0.0;  // fractional sample index
  double value = 0.0;
  std::size_t run_begin = 0;
  std::size_t run_end = 0;  // inclusive
};

std::vector<Minimum> negative_minima(std::span<const double> y) {
  std::vector<Minimum> found;
  const std::size_t n = y.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(y[i] < y[i - 1]) || !(y[i] < 0.0)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 < n && y[j + 1] > y[i]) {
      Minimum m{static_cast<double>(i + j) / 2.0, y[i], i, j};
      if (i == j) {
        const double den = y[i - 1] - 2.0 * y[i] + y[i + 1];
        m.position += 0.5 * (y[i - 1] - y[i + 1]) / den;
      }
      found.push_back(m);
    }
    i = j + 1;
  }
  return found;
}

// Depth below the lower of the two enclosing maxima, each taken up to the
// first sample lower than the minimum (or the buffer end).
double prominence(std::span<const double> y, const Minimum& m) {
  double left = m.value;
  for (std::size_t k = m.run_begin; k-- > 0;) {
    if (y[k] < m.value) break;
    left = std::max(left, y[k]);
  }
  double right = m.value;
  for (std::size_t k = m.run_end + 1; k < y.size(); ++k) {
    if (y[k] < m.value) break;
    right = std::max(right, y[k]);
  }
  return std::min(left, right) - m.value;
}

}  // namespace

EpochSequence detect_positive_zero_crossings(const SampledSignal& filtered) {
  auto y = filtered.samples();
  std::vector<double> times;
  for (std::size_t k = 0; k + 1 < y.size(); ++k) {
    if (y[k] < 0.0 && y[k + 1] >= 0.0) {
      const double frac = -y[k] / (y[k + 1] - y[k]);
      times.push_back(filtered.time_of(static_cast<double>(k) + frac));
    }
  }
  return EpochSequence(std::move(times), filtered.sample_rate_hz());
}

EpochSequence detect_negative_peaks(const SampledSignal& filtered) {
  std::vector<double> times;
  for (const Minimum& m : negative_minima(filtered.samples())) {
    times.push_back(filtered.time_of(m.position));
  }
  return EpochSequence(std::move(times), filtered.sample_rate_hz());
}

EpochSequence detect_epochs(const SampledSignal& filtered, EpochDetector detector) {
  return detector == EpochDetector::PositiveZeroCrossing
             ? detect_positive_zero_crossings(filtered)
             : detect_negative_peaks(filtered);
}

EpochSequence extract_epochs(const SampledSignal& signal, const FilterConfig& config) {
  return detect_epochs(run_pipeline(signal, config), config.detector);
}

EpochSequence egg_reference_epochs(const SampledSignal& egg, double prominence_fraction) {
  if (egg.size() < 3) throw Error(ErrorCode::TooShort, "egg needs at least 3 samples");
  if (prominence_fraction < 0.0 || prominence_fraction > 1.0) {
    throw Error(ErrorCode::BadConfig, "prominence fraction must be in [0, 1]");
  }
  const SampledSignal degg = differentiate(egg);
  auto y = degg.samples();
  const auto minima = negative_minima(y);
  std::vector<double> prom(minima.size());
  double max_prom = 0.0;
  for (std::size_t i = 0; i < minima.size(); ++i) {
    prom[i] = prominence(y, minima[i]);
    max_prom = std::max(max_prom, prom[i]);
  }
  std::vector<double> times;
  for (std::size_t i = 0; i < minima.size(); ++i) {
    if (prom[i] >= prominence_fraction * max_prom && prom[i] > 0.0) {
      times.push_back(degg.time_of(minima[i].position));
    }
  }
  return EpochSequence(std::move(times), egg.sample_rate_hz());
}

EvalReport evaluate(const EpochSequence& detected, const EpochSequence& reference,
                    double tolerance_s) {
  if (!(tolerance_s > 0.0)) {
    throw Error(ErrorCode::BadConfig, "tolerance must be positive");
  }
  EvalReport rep;
  rep.reference_count = reference.size();
  rep.detected_count = detected.size();
  rep.tolerance_s = tolerance_s;

  auto det = detected.times_s();
  std::vector<bool> used(det.size(), false);
  double err_sum = 0.0;
  for (double ref : reference.times_s()) {
    auto it = std::lower_bound(det.begin(), det.end(), ref - tolerance_s);
    std::size_t best = det.size();
    double best_err = std::numeric_limits<double>::infinity();
    for (auto k = static_cast<std::size_t>(it - det.begin());
         k < det.size() && det[k] <= ref + tolerance_s; ++k) {
      const double e = std::abs(det[k] - ref);
      if (!used[k] && e < best_err) {
        best = k;
        best_err = e;
      }
    }
    if (best < det.size()) {
      used[best] = true;
      ++rep.matched_count;
      err_sum += best_err;
    }
  }
  if (rep.matched_count > 0) {
    rep.mean_abs_error_s = err_sum / static_cast<double>(rep.matched_count);
  }
  return rep;
}

}  // namespace zfepoch
