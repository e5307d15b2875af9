#pragma once

#include <span>
#include <vector>

namespace humanizer::testkit {

double mean(std::span<const double> values);

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

/// One-sided Mann-Whitney U p-value for the alternative "a is stochastically
/// greater than b", normal approximation with tie correction.
double mann_whitney_greater_p(std::span<const double> a, std::span<const double> b);

/// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace humanizer::testkit
