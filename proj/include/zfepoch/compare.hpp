#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zfepoch/core.hpp"

namespace zfepoch {

enum class Alignment {
  // d1[i] against d2[i].
  Index,
  // Each d1 interval paired with the closest-valued unmatched d2 interval.
  Nearest,
};

std::string_view to_string(Alignment a);
std::optional<Alignment> parse_alignment(std::string_view s);

struct MatchConfig {
  double epsilon_s = 0.0005;
  Alignment alignment = Alignment::Index;
};

struct SimilarityScore {
  // Summed over locks for a confidence score.
  std::size_t delta12_count = 0;
  std::size_t compared_pairs = 0;
  std::vector<std::size_t> per_lock_counts;
  std::vector<std::size_t> per_lock_pairs;
  double average = 0.0;
};

DeltaSequence deltas(const EpochSequence& epochs);

/// Number of interval pairs whose difference is within cfg.epsilon_s.
SimilarityScore delta12_count(const DeltaSequence& d1, const DeltaSequence& d2,
                              const MatchConfig& cfg = {});

/// Delta12 count of `test` against every lock, averaged. Throws NoLocks.
SimilarityScore confidence(const EpochSequence& test, std::span<const EpochSequence> locks,
                           const MatchConfig& cfg = {});

}  // namespace zfepoch
