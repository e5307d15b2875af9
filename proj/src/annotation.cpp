#include "humanizer/annotation.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "humanizer/error.hpp"

namespace humanizer {

std::string to_string(ChainType chain) {
  switch (chain) {
    case ChainType::heavy: return "heavy";
    case ChainType::light: return "light";
    case ChainType::vhh: return "vhh";
  }
  return "unknown";
}

ChainType chain_type_from_string(const std::string& s) {
  if (s == "heavy") return ChainType::heavy;
  if (s == "light") return ChainType::light;
  if (s == "vhh") return ChainType::vhh;
  fail("unknown chain_type '", s, "' (expected heavy, light, or vhh)");
}

bool RegionAnnotation::is_cdr(std::size_t pos) const {
  auto it = std::upper_bound(cdr_intervals.begin(), cdr_intervals.end(), pos,
                             [](std::size_t p, const Interval& iv) { return p < iv.start; });
  if (it == cdr_intervals.begin()) return false;
  --it;
  return pos >= it->start && pos < it->end;
}

bool RegionAnnotation::is_canonical_cysteine(std::size_t pos) const {
  return std::find(canonical_cysteines.begin(), canonical_cysteines.end(), pos) !=
         canonical_cysteines.end();
}

void RegionAnnotation::validate_for_length(std::size_t length) const {
  for (const auto& iv : cdr_intervals) {
    require(iv.end <= length, "annotation: CDR interval [", iv.start, ", ", iv.end,
            ") exceeds sequence length ", length);
  }
  for (std::size_t pos : canonical_cysteines) {
    require(pos < length, "annotation: canonical cysteine position ", pos,
            " exceeds sequence length ", length);
  }
}

RegionAnnotation make_annotation(std::vector<Interval> cdr_intervals,
                                 std::vector<std::size_t> canonical_cysteines,
                                 ChainType chain_type,
                                 std::vector<std::string>* warnings) {
  for (const auto& iv : cdr_intervals) {
    require(iv.start < iv.end, "annotation: interval end must be greater than start, got [",
            iv.start, ", ", iv.end, ")");
  }
  std::sort(cdr_intervals.begin(), cdr_intervals.end(),
            [](const Interval& a, const Interval& b) {
              return a.start != b.start ? a.start < b.start : a.end < b.end;
            });
  std::vector<Interval> merged;
  for (const auto& iv : cdr_intervals) {
    if (!merged.empty() && iv.start <= merged.back().end) {
      if (iv.end > merged.back().end) merged.back().end = iv.end;
      if (warnings) {
        warnings->push_back(detail::concat("annotation: overlapping CDR intervals merged into [",
                                           merged.back().start, ", ", merged.back().end, ")"));
      }
    } else {
      merged.push_back(iv);
    }
  }
  std::sort(canonical_cysteines.begin(), canonical_cysteines.end());
  canonical_cysteines.erase(
      std::unique(canonical_cysteines.begin(), canonical_cysteines.end()),
      canonical_cysteines.end());
  return {std::move(merged), std::move(canonical_cysteines), chain_type};
}

RegionAnnotation parse_annotation(const std::string& path,
                                  std::vector<std::string>* warnings) {
  std::ifstream in(path);
  require(in.good(), "cannot open annotation file: ", path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("annotation file ", path, ": invalid JSON: ", e.what());
  }
  require(j.is_object(), "annotation file ", path, ": top level must be a JSON object");
  require(j.contains("cdr_intervals"), "annotation file ", path, ": missing cdr_intervals");
  require(j.contains("canonical_cysteines"), "annotation file ", path,
          ": missing canonical_cysteines");
  require(j.contains("chain_type"), "annotation file ", path, ": missing chain_type");

  std::vector<Interval> intervals;
  for (const auto& item : j.at("cdr_intervals")) {
    require(item.is_array() && item.size() == 2, "annotation file ", path,
            ": each cdr_interval must be a [start, end) pair");
    const auto start = item[0].get<long long>();
    const auto end = item[1].get<long long>();
    require(start >= 0 && end >= 0, "annotation file ", path,
            ": interval bounds must be non-negative");
    intervals.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
  }
  std::vector<std::size_t> cysteines;
  for (const auto& item : j.at("canonical_cysteines")) {
    const auto pos = item.get<long long>();
    require(pos >= 0, "annotation file ", path, ": cysteine positions must be non-negative");
    cysteines.push_back(static_cast<std::size_t>(pos));
  }
  const ChainType chain = chain_type_from_string(j.at("chain_type").get<std::string>());
  return make_annotation(std::move(intervals), std::move(cysteines), chain, warnings);
}

}  // namespace humanizer
