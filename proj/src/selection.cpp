#include "humanizer/selection.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "humanizer/error.hpp"

namespace humanizer {

namespace {

double metric_value(const Candidate& c, const std::string& metric) {
  const auto it = c.scores.find(metric);
  require(it != c.scores.end(), "candidate '", c.sequence.id, "' is missing metric '",
          metric, "'");
  return it->second;
}

}  // namespace

UniqueImproved count_unique_improved(std::span<const Candidate> candidates,
                                     double starter_score, const std::string& metric) {
  std::unordered_set<std::string> unique;
  std::unordered_set<std::string> improved;
  for (const auto& c : candidates) {
    const std::string key = c.sequence.to_string();
    unique.insert(key);
    if (metric_value(c, metric) > starter_score) improved.insert(key);
  }
  return {improved.size(), unique.size()};
}

std::vector<Candidate> select(std::span<const Candidate> candidates,
                              const SelectionMode& mode, Rng& rng) {
  std::vector<Candidate> pool;
  for (const auto& c : candidates) {
    if (c.passed_filters) pool.push_back(c);
  }

  if (const auto* ranked = std::get_if<RankedSelection>(&mode)) {
    require(ranked->k <= pool.size(), "select: k = ", ranked->k,
            " exceeds the filter-passing pool of ", pool.size());
    for (const auto& c : pool) metric_value(c, ranked->oracle);  // validate up front
    std::sort(pool.begin(), pool.end(), [&](const Candidate& a, const Candidate& b) {
      const double sa = metric_value(a, ranked->oracle);
      const double sb = metric_value(b, ranked->oracle);
      if (sa != sb) return sa > sb;
      return a.sequence.to_string() < b.sequence.to_string();
    });
    pool.resize(ranked->k);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i].rank = i + 1;
    return pool;
  }

  const auto& unranked = std::get<UnrankedSelection>(mode);
  require(unranked.k <= pool.size(), "select: k = ", unranked.k,
          " exceeds the filter-passing pool of ", pool.size());
  // Partial Fisher-Yates: the first k slots become a uniform sample without
  // replacement.
  for (std::size_t i = 0; i < unranked.k; ++i) {
    const std::size_t j = i + rng.next_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(unranked.k);
  return pool;
}

}  // namespace humanizer
