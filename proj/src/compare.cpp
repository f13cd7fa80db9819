#include "zfepoch/compare.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

namespace zfepoch {

std::string_view to_string(Alignment a) {
  return a == Alignment::Index ? "index" : "nearest";
}

std::optional<Alignment> parse_alignment(std::string_view s) {
  if (s == "index") return Alignment::Index;
  if (s == "nearest") return Alignment::Nearest;
  return std::nullopt;
}

DeltaSequence deltas(const EpochSequence& epochs) {
  auto t = epochs.times_s();
  std::vector<double> d;
  if (t.size() >= 2) {
    d.reserve(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) d.push_back(t[i + 1] - t[i]);
  }
  return DeltaSequence(std::move(d));
}

SimilarityScore delta12_count(const DeltaSequence& d1, const DeltaSequence& d2,
                              const MatchConfig& cfg) {
  if (!(cfg.epsilon_s > 0.0)) throw Error(ErrorCode::BadConfig, "epsilon must be positive");
  SimilarityScore s;
  s.compared_pairs = std::min(d1.size(), d2.size());
  if (cfg.alignment == Alignment::Index) {
    for (std::size_t i = 0; i < s.compared_pairs; ++i) {
      if (std::abs(d1[i] - d2[i]) <= cfg.epsilon_s) ++s.delta12_count;
    }
  } else {
    std::vector<bool> used(d2.size(), false);
    for (double a : d1.intervals_s()) {
      if (s.delta12_count == s.compared_pairs) break;
      std::size_t best = d2.size();
      double best_err = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < d2.size(); ++j) {
        const double e = std::abs(a - d2[j]);
        if (!used[j] && e < best_err) {
          best = j;
          best_err = e;
        }
      }
      if (best < d2.size() && best_err <= cfg.epsilon_s) {
        used[best] = true;
        ++s.delta12_count;
      }
    }
  }
  s.per_lock_counts = {s.delta12_count};
  s.per_lock_pairs = {s.compared_pairs};
  s.average = static_cast<double>(s.delta12_count);
  return s;
}

SimilarityScore confidence(const EpochSequence& test, std::span<const EpochSequence> locks,
                           const MatchConfig& cfg) {
  if (locks.empty()) throw Error(ErrorCode::NoLocks, "confidence needs at least one lock");
  const DeltaSequence td = deltas(test);
  std::vector<std::future<SimilarityScore>> jobs;
  jobs.reserve(locks.size());
  for (const EpochSequence& lock : locks) {
    jobs.push_back(std::async(std::launch::async, [&td, &lock, &cfg] {
      return delta12_count(td, deltas(lock), cfg);
    }));
  }
  SimilarityScore total;
  for (auto& job : jobs) {
    const SimilarityScore one = job.get();
    total.per_lock_counts.push_back(one.delta12_count);
    total.per_lock_pairs.push_back(one.compared_pairs);
    total.delta12_count += one.delta12_count;
    total.compared_pairs += one.compared_pairs;
  }
  total.average = static_cast<double>(total.delta12_count) /
                  static_cast<double>(total.per_lock_counts.size());
  return total;
}

}  // namespace zfepoch
