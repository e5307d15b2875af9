#include "humanizer/matrix_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "humanizer/error.hpp"

namespace humanizer {

namespace {

std::string expected_header() {
  std::string h;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    if (i > 0) h.push_back('\t');
    h.push_back(kAlphabet[i]);
  }
  return h;
}

}  // namespace

MatrixTsv load_matrix_tsv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open matrix file: ", path);
  MatrixTsv out;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = 1;
      while (start < line.size() && line[start] == ' ') ++start;
      out.comments.push_back(line.substr(start));
      continue;
    }
    if (!header_seen) {
      require(line == expected_header(), "matrix file ", path, " line ", line_no,
              ": header must be the 20 alphabet letters tab-separated");
      header_seen = true;
      continue;
    }
    LogitsRow row;
    std::istringstream fields(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(fields, field, '\t')) {
      require(col < kAlphabetSize, "matrix file ", path, " line ", line_no,
              ": more than ", kAlphabetSize, " columns");
      try {
        std::size_t consumed = 0;
        row[col] = std::stod(field, &consumed);
        require(consumed == field.size(), "trailing characters");
      } catch (const std::exception&) {
        fail("matrix file ", path, " line ", line_no, ": bad number '", field, "'");
      }
      require(std::isfinite(row[col]), "matrix file ", path, " line ", line_no,
              ": non-finite value");
      ++col;
    }
    require(col == kAlphabetSize, "matrix file ", path, " line ", line_no, ": expected ",
            kAlphabetSize, " columns, got ", col);
    out.rows.push_back(row);
  }
  require(header_seen, "matrix file ", path, ": missing header row");
  require(!out.rows.empty(), "matrix file ", path, ": no data rows");
  return out;
}

void save_matrix_tsv(const std::string& path, const std::vector<LogitsRow>& rows,
                     const std::vector<std::string>& comments) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  for (const auto& c : comments) out << "# " << c << '\n';
  out << expected_header() << '\n';
  char buf[64];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      if (i > 0) out << '\t';
      out << buf;
    }
    out << '\n';
  }
  require(out.good(), "error writing matrix file: ", path);
}

}  // namespace humanizer
