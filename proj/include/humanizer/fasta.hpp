#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "humanizer/sequence.hpp"

namespace humanizer {

/// Parses a FASTA file. Record ids are the first whitespace-delimited token
/// of each header; '#' denotes a masked position. Throws on an empty file,
/// content before the first header, empty records, and illegal characters
/// (reported with record id and 0-based offset).
std::vector<AntibodySequence> parse_fasta(const std::string& path);

std::vector<AntibodySequence> parse_fasta_stream(std::istream& in,
                                                 const std::string& source_name);

/// Writes one single-line record per sequence, so that parse -> write
/// round-trips residue strings byte for byte.
void write_fasta(const std::string& path, const std::vector<AntibodySequence>& seqs);

void write_fasta_stream(std::ostream& out, const std::vector<AntibodySequence>& seqs);

}  // namespace humanizer
