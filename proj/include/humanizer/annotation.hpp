#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace humanizer {

enum class ChainType { heavy, light, vhh };

std::string to_string(ChainType chain);
ChainType chain_type_from_string(const std::string& s);

/// Half-open 0-based index interval [start, end).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Interval&) const = default;
};

/// CDR intervals and canonical cysteine positions for one chain. CDR
/// intervals are expected to come from the union of the IMGT, Kabat and
/// Chothia definitions, precomputed by the user; overlapping inputs are
/// merged with a warning.
struct RegionAnnotation {
  std::vector<Interval> cdr_intervals;  // sorted, non-overlapping
  std::vector<std::size_t> canonical_cysteines;
  ChainType chain_type = ChainType::heavy;

  bool is_cdr(std::size_t pos) const;
  bool is_canonical_cysteine(std::size_t pos) const;

  /// Throws if any interval or cysteine position falls outside [0, L).
  void validate_for_length(std::size_t length) const;
};

/// Normalizes raw intervals (sort, merge overlapping with a warning) and
/// validates basic well-formedness. `warnings`, when non-null, collects
/// human-readable notes such as merge events.
RegionAnnotation make_annotation(std::vector<Interval> cdr_intervals,
                                 std::vector<std::size_t> canonical_cysteines,
                                 ChainType chain_type,
                                 std::vector<std::string>* warnings = nullptr);

/// Reads a JSON annotation file with fields `cdr_intervals` (list of
/// [start, end) pairs), `canonical_cysteines`, and `chain_type`.
RegionAnnotation parse_annotation(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr);

}  // namespace humanizer
