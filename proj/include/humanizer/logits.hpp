#pragma once

#include <array>
#include <span>
#include <vector>

#include "humanizer/alphabet.hpp"
#include "humanizer/rng.hpp"

namespace humanizer {

/// One row of per-residue values, columns in fixed alphabet order.
using LogitsRow = std::array<double, kAlphabetSize>;

/// L x 20 matrix of per-position residue log-probabilities.
struct LogitsMatrix {
  std::vector<LogitsRow> rows;

  std::size_t length() const { return rows.size(); }
  const LogitsRow& operator[](std::size_t l) const { return rows[l]; }
  LogitsRow& operator[](std::size_t l) { return rows[l]; }

  bool all_finite() const;
};

/// Temperature softmax: p[i] = exp(z[i]/tau) / sum_k exp(z[k]/tau), computed
/// with max subtraction. Throws on non-finite input or tau <= 0.
LogitsRow softmax_temp(const LogitsRow& z, double tau);

/// Log of softmax_temp at tau = 1, for log-likelihood accumulation.
LogitsRow log_softmax(const LogitsRow& z);

/// Combined logits for the per-position product-of-experts distribution:
/// z/tau + sum_k s_k/tau_k, normalization deferred to the softmax. Each
/// expert row is shifted by its own maximum first; the shift is absorbed by
/// the softmax and makes a constant-score expert contribute exactly zero.
LogitsRow poe_row(const LogitsRow& z, double tau, std::span<const LogitsRow> expert_scores,
                  std::span<const double> expert_temps);

/// Index of the maximum entry; ties break to the lowest alphabet index.
std::size_t argmax_row(const LogitsRow& row);

/// Inverse-CDF draw from a probability row over the fixed alphabet order.
/// Requires non-negative entries summing to 1 within 1e-9.
Residue sample_categorical(const LogitsRow& p, Rng& rng);

}  // namespace humanizer
