#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "humanizer/sequence.hpp"

namespace humanizer {

/// A generated sequence plus everything the pipeline learns about it.
struct Candidate {
  AntibodySequence sequence;
  std::vector<Mutation> mutations;  // diff against the starter
  std::map<std::string, double> scores;
  bool passed_filters = true;
  std::string filter_failures;  // e.g. "ddd@5;cys@41", 1-based positions
  std::optional<std::size_t> rank;
  std::uint64_t trajectory_seed = 0;
};

}  // namespace humanizer
