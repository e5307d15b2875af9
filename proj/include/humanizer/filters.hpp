#pragma once

#include <string>
#include <vector>

#include "humanizer/annotation.hpp"
#include "humanizer/sequence.hpp"

namespace humanizer {

/// Rule set identifier carried in reports; the motif concretizations below
/// are the "v1" reading of the liability classes.
inline constexpr const char* kFilterRulesVersion = "v1";

struct FilterResult {
  std::string name;
  bool passed = true;
  std::vector<std::size_t> positions;  // 0-based offending positions
};

struct FilterReport {
  std::vector<FilterResult> results;

  /// A candidate passes overall iff it passes every enabled filter.
  bool passed() const;

  /// "ddd@5;nglyc@33;cys@41" with 1-based positions; empty when clean.
  std::string failures_string() const;
};

struct LiabilityFilterConfig {
  bool ddd_isomerization = true;     // any "DDD" substring
  bool n_glycosylation = true;       // N-X-(S|T) sequon with X != P
  bool non_canonical_cysteine = true;  // C outside annotated canonical positions
};

/// Developability liability screen. Offending positions are the motif start
/// (DDD, sequon) or the cysteine position itself.
FilterReport filter_liabilities(const AntibodySequence& seq,
                                const RegionAnnotation& annotation,
                                const LiabilityFilterConfig& config = {});

}  // namespace humanizer
