#include "humanizer/sequence.hpp"

#include <algorithm>

#include "humanizer/error.hpp"

namespace humanizer {

bool AntibodySequence::contains_mask() const {
  return std::find(residues.begin(), residues.end(), kMaskResidue) != residues.end();
}

std::string AntibodySequence::to_string() const {
  std::string s;
  s.reserve(residues.size());
  for (Residue r : residues) s.push_back(residue_to_char(r));
  return s;
}

AntibodySequence AntibodySequence::from_string(std::string id, std::string_view text) {
  AntibodySequence seq;
  seq.id = std::move(id);
  seq.residues.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto r = residue_from_char(text[i]);
    require(r.has_value(), "sequence '", seq.id, "': illegal character '", text[i],
            "' at offset ", i);
    seq.residues.push_back(*r);
  }
  return seq;
}

std::string Mutation::to_report_string() const {
  std::string s;
  s.push_back(residue_to_char(from));
  s += std::to_string(position + 1);
  s.push_back(residue_to_char(to));
  return s;
}

std::vector<Mutation> diff(const AntibodySequence& a, const AntibodySequence& b) {
  require(a.length() == b.length(), "diff: length mismatch (", a.length(), " vs ",
          b.length(), ")");
  require(!a.contains_mask() && !b.contains_mask(),
          "diff: sequences must not contain MASK");
  std::vector<Mutation> out;
  for (std::size_t i = 0; i < a.length(); ++i) {
    if (a.residues[i] != b.residues[i]) {
      out.push_back({i, a.residues[i], b.residues[i]});
    }
  }
  return out;
}

AntibodySequence apply_mutations(const AntibodySequence& seq,
                                 std::span<const Mutation> mutations) {
  AntibodySequence out = seq;
  for (const auto& m : mutations) {
    require(m.position < out.length(), "apply_mutations: position ", m.position,
            " out of range for length ", out.length());
    require(out.residues[m.position] == m.from, "apply_mutations: expected ",
            residue_to_char(m.from), " at position ", m.position + 1, ", found ",
            residue_to_char(out.residues[m.position]));
    out.residues[m.position] = m.to;
  }
  return out;
}

std::string mutations_report_string(std::span<const Mutation> mutations) {
  std::string s;
  for (std::size_t i = 0; i < mutations.size(); ++i) {
    if (i > 0) s.push_back(';');
    s += mutations[i].to_report_string();
  }
  return s;
}

std::uint64_t sequence_hash(const AntibodySequence& seq) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Residue r : seq.residues) {
    h ^= static_cast<std::uint64_t>(r);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace humanizer
