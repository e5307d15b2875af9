#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "humanizer/alphabet.hpp"

namespace humanizer {

/// A fixed-length antibody sequence. Positions are 0-based internally;
/// human-readable reports use 1-based positions.
struct AntibodySequence {
  std::string id;
  std::vector<Residue> residues;

  std::size_t length() const { return residues.size(); }
  bool contains_mask() const;
  std::string to_string() const;

  /// Residue-wise equality, ignoring ids.
  bool same_residues(const AntibodySequence& other) const {
    return residues == other.residues;
  }

  /// Parses a residue string ('#' = MASK). Throws on illegal characters.
  static AntibodySequence from_string(std::string id, std::string_view residues);
};

/// A single substitution against a reference sequence.
struct Mutation {
  std::size_t position = 0;  // 0-based
  Residue from = 0;
  Residue to = 0;

  /// Report notation, e.g. "A23T" (1-based position).
  std::string to_report_string() const;

  bool operator==(const Mutation&) const = default;
};

/// Position-wise differences between two equal-length, mask-free sequences,
/// ascending by position. Empty iff the sequences match.
std::vector<Mutation> diff(const AntibodySequence& a, const AntibodySequence& b);

/// Applies mutations to a copy of the sequence. Each mutation's `from`
/// residue must match the current residue at its position.
AntibodySequence apply_mutations(const AntibodySequence& seq,
                                 std::span<const Mutation> mutations);

/// Semicolon-joined report notation for a mutation list ("A23T;K45R").
std::string mutations_report_string(std::span<const Mutation> mutations);

/// Stable FNV-1a digest of the residue content (id excluded). Used to detect
/// stale cached oracle matrices.
std::uint64_t sequence_hash(const AntibodySequence& seq);

}  // namespace humanizer
