#include "humanizer/testkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "humanizer/error.hpp"

namespace humanizer::testkit {

double mean(std::span<const double> values) {
  require(!values.empty(), "mean: empty sample");
  double total = 0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: empty sample");
  require(q >= 0 && q <= 1, "quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

/// Average ranks (1-based) with ties sharing their group mean.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double mann_whitney_greater_p(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "mann_whitney: empty sample");
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::vector<double> combined;
  combined.reserve(a.size() + b.size());
  combined.insert(combined.end(), a.begin(), a.end());
  combined.insert(combined.end(), b.begin(), b.end());
  const std::vector<double> ranks = average_ranks(combined);

  double rank_sum_a = 0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
  const double u = rank_sum_a - n1 * (n1 + 1) / 2;

  // Tie correction over rank groups.
  std::vector<double> sorted = combined;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double n = n1 + n2;
  const double variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)));
  require(variance > 0, "mann_whitney: zero variance (all values tied)");
  const double z = (u - n1 * n2 / 2) / std::sqrt(variance);
  return normal_sf(z);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "spearman_rho: length mismatch");
  require(x.size() >= 3, "spearman_rho: need at least 3 points");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0 && syy > 0, "spearman_rho: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace humanizer::testkit
