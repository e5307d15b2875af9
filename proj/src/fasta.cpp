#include "humanizer/fasta.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "humanizer/error.hpp"

namespace humanizer {

namespace {

std::string header_id(const std::string& line) {
  // Skip '>' and take the first whitespace-delimited token.
  std::size_t start = 1;
  while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
  std::size_t end = start;
  while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
  return line.substr(start, end - start);
}

}  // namespace

std::vector<AntibodySequence> parse_fasta_stream(std::istream& in,
                                                 const std::string& source_name) {
  std::vector<AntibodySequence> records;
  std::string line;
  bool in_record = false;
  std::string current_id;
  std::vector<Residue> current;

  auto flush = [&] {
    if (!in_record) return;
    require(!current.empty(), source_name, ": record '", current_id, "' is empty");
    records.push_back({current_id, current});
    current.clear();
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      flush();
      current_id = header_id(line);
      require(!current_id.empty(), source_name, ": header with empty id");
      in_record = true;
      continue;
    }
    require(in_record, source_name, ": sequence data before first '>' header");
    for (char c : line) {
      if (c == ' ' || c == '\t') continue;
      const auto r = residue_from_char(c);
      require(r.has_value(), source_name, ": record '", current_id,
              "': illegal character '", c, "' at offset ", current.size());
      current.push_back(*r);
    }
  }
  flush();
  require(!records.empty(), source_name, ": no FASTA records found");
  return records;
}

std::vector<AntibodySequence> parse_fasta(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open FASTA file: ", path);
  return parse_fasta_stream(in, path);
}

void write_fasta_stream(std::ostream& out, const std::vector<AntibodySequence>& seqs) {
  for (const auto& s : seqs) {
    out << '>' << s.id << '\n' << s.to_string() << '\n';
  }
}

void write_fasta(const std::string& path, const std::vector<AntibodySequence>& seqs) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  write_fasta_stream(out, seqs);
  require(out.good(), "error writing FASTA file: ", path);
}

}  // namespace humanizer
