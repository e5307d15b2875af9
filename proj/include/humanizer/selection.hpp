#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "humanizer/candidate.hpp"
#include "humanizer/rng.hpp"

namespace humanizer {

struct UniqueImproved {
  std::size_t improved = 0;  // distinct sequences with metric strictly above the starter's
  std::size_t unique = 0;    // distinct sequences overall
};

/// Counts distinct candidate sequences, and those whose named metric strictly
/// exceeds the starter's value. Throws if the metric is missing on any
/// candidate.
UniqueImproved count_unique_improved(std::span<const Candidate> candidates,
                                     double starter_score, const std::string& metric);

/// Sort descending by the named oracle score (ties by sequence text), take
/// the top k, assign ranks 1..k.
struct RankedSelection {
  std::size_t k = 10;
  std::string oracle;
};

/// Uniform sample of k without replacement.
struct UnrankedSelection {
  std::size_t k = 20;
};

using SelectionMode = std::variant<RankedSelection, UnrankedSelection>;

/// Selection operates on filter-passing candidates only; k must not exceed
/// that pool.
std::vector<Candidate> select(std::span<const Candidate> candidates,
                              const SelectionMode& mode, Rng& rng);

}  // namespace humanizer
