#include "humanizer/percentile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "humanizer/error.hpp"

namespace humanizer {

PercentileReference make_percentile_reference(std::vector<double> scores) {
  require(!scores.empty(), "percentile reference must not be empty");
  for (double s : scores) require(std::isfinite(s), "percentile reference: non-finite score");
  std::sort(scores.begin(), scores.end());
  return {std::move(scores)};
}

PercentileReference load_percentile_reference(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open percentile reference: ", path);
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      scores.push_back(std::stod(line));
    } catch (const std::exception&) {
      fail("percentile reference ", path, " line ", line_no, ": bad number '", line, "'");
    }
  }
  return make_percentile_reference(std::move(scores));
}

void save_percentile_reference(const std::string& path, const PercentileReference& ref) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  char buf[40];
  for (double s : ref.scores) {
    std::snprintf(buf, sizeof buf, "%.17g\n", s);
    out << buf;
  }
  require(out.good(), "error writing percentile reference: ", path);
}

double percentile(double score, const PercentileReference& ref) {
  require(!ref.scores.empty(), "percentile: empty reference");
  const auto below = std::lower_bound(ref.scores.begin(), ref.scores.end(), score);
  return static_cast<double>(below - ref.scores.begin()) /
         static_cast<double>(ref.scores.size());
}

}  // namespace humanizer
