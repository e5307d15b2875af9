#include "humanizer/logits.hpp"

#include <algorithm>
#include <cmath>

#include "humanizer/error.hpp"

namespace humanizer {

bool LogitsMatrix::all_finite() const {
  for (const auto& row : rows) {
    for (double v : row) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

LogitsRow softmax_temp(const LogitsRow& z, double tau) {
  require(tau > 0, "softmax_temp: temperature must be positive, got ", tau);
  for (double v : z) require(std::isfinite(v), "softmax_temp: non-finite logit");
  const double zmax = *std::max_element(z.begin(), z.end());
  LogitsRow p;
  double total = 0;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    p[i] = std::exp((z[i] - zmax) / tau);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

LogitsRow log_softmax(const LogitsRow& z) {
  for (double v : z) require(std::isfinite(v), "log_softmax: non-finite logit");
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0;
  for (double v : z) total += std::exp(v - zmax);
  const double log_norm = zmax + std::log(total);
  LogitsRow out;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] = z[i] - log_norm;
  return out;
}

LogitsRow poe_row(const LogitsRow& z, double tau, std::span<const LogitsRow> expert_scores,
                  std::span<const double> expert_temps) {
  require(expert_scores.size() == expert_temps.size(),
          "poe_row: got ", expert_scores.size(), " expert score rows but ",
          expert_temps.size(), " temperatures");
  require(tau > 0, "poe_row: tau must be positive");
  LogitsRow out;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    require(std::isfinite(z[i]), "poe_row: non-finite logit");
    out[i] = z[i] / tau;
  }
  for (std::size_t k = 0; k < expert_scores.size(); ++k) {
    const double tau_k = expert_temps[k];
    require(tau_k > 0, "poe_row: expert temperature must be positive, got ", tau_k);
    const auto& s = expert_scores[k];
    for (double v : s) require(std::isfinite(v), "poe_row: non-finite expert score");
    const double smax = *std::max_element(s.begin(), s.end());
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      out[i] += (s[i] - smax) / tau_k;
    }
  }
  return out;
}

std::size_t argmax_row(const LogitsRow& row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kAlphabetSize; ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

Residue sample_categorical(const LogitsRow& p, Rng& rng) {
  double total = 0;
  for (double v : p) {
    require(v >= 0, "sample_categorical: negative probability ", v);
    total += v;
  }
  require(std::abs(total - 1.0) <= 1e-9,
          "sample_categorical: probabilities sum to ", total, ", expected 1");
  const double u = rng.next_double() * total;
  double cum = 0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    if (p[i] > 0) last_nonzero = i;
    cum += p[i];
    if (u < cum) return static_cast<Residue>(i);
  }
  return static_cast<Residue>(last_nonzero);
}

}  // namespace humanizer
