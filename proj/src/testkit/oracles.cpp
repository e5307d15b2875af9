#include "humanizer/testkit/oracles.hpp"

#include <cmath>

#include "humanizer/error.hpp"
#include "humanizer/rng.hpp"

namespace humanizer::testkit {

namespace {

/// Approximate standard normal draw (sum of 12 uniforms, recentred). Plenty
/// for synthetic landscapes and fully pinned to the library Rng.
double gaussian_ish(Rng& rng) {
  double s = 0;
  for (int i = 0; i < 12; ++i) s += rng.next_double();
  return s - 6.0;
}

void check_query(const AntibodySequence& seq, std::size_t position, std::size_t length) {
  require(seq.length() == length, "testkit oracle: sequence length ", seq.length(),
          " does not match landscape length ", length);
  require(position < length, "testkit oracle: position ", position, " out of range");
  for (std::size_t l = 0; l < seq.length(); ++l) {
    require(l == position || is_canonical(seq.residues[l]),
            "testkit oracle: MASK at position ", l, " (oracles never see masks)");
  }
}

}  // namespace

AdditiveOracle::AdditiveOracle(std::vector<LogitsRow> weights)
    : weights_(std::move(weights)) {
  require(!weights_.empty(), "AdditiveOracle: empty weight table");
}

AdditiveOracle AdditiveOracle::random(std::size_t length, double scale, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LogitsRow> w(length);
  for (auto& row : w) {
    for (double& v : row) v = scale * gaussian_ish(rng);
  }
  return AdditiveOracle(std::move(w));
}

LogitsRow AdditiveOracle::point_scores(const AntibodySequence& seq,
                                       std::size_t position) const {
  check_query(seq, position, weights_.size());
  double rest = 0;
  for (std::size_t l = 0; l < seq.length(); ++l) {
    if (l != position) rest += weights_[l][seq.residues[l]];
  }
  LogitsRow out;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] = weights_[position][i] + rest;
  return out;
}

double AdditiveOracle::value(const AntibodySequence& seq) const {
  require(seq.length() == weights_.size(), "AdditiveOracle::value: length mismatch");
  require(!seq.contains_mask(), "AdditiveOracle::value: MASK present");
  double total = 0;
  for (std::size_t l = 0; l < seq.length(); ++l) total += weights_[l][seq.residues[l]];
  return total;
}

PairwiseEpistaticOracle::PairwiseEpistaticOracle(std::vector<LogitsRow> weights,
                                                 std::vector<PairTerm> pairs)
    : weights_(std::move(weights)), pairs_(std::move(pairs)) {
  require(!weights_.empty(), "PairwiseEpistaticOracle: empty weight table");
  for (const auto& pair : pairs_) {
    require(pair.first < weights_.size() && pair.second < weights_.size() &&
                pair.first != pair.second,
            "PairwiseEpistaticOracle: bad pair (", pair.first, ", ", pair.second, ")");
    require(pair.table.size() == kAlphabetSize,
            "PairwiseEpistaticOracle: interaction table must be 20 x 20");
  }
}

PairwiseEpistaticOracle PairwiseEpistaticOracle::random(
    std::size_t length, double scale, std::vector<std::pair<std::size_t, std::size_t>> pairs,
    double epsilon, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LogitsRow> w(length);
  for (auto& row : w) {
    for (double& v : row) v = scale * gaussian_ish(rng);
  }
  std::vector<PairTerm> terms;
  for (const auto& [a, b] : pairs) {
    PairTerm term{a, b, std::vector<LogitsRow>(kAlphabetSize)};
    for (auto& row : term.table) {
      for (double& v : row) v = epsilon * gaussian_ish(rng);
    }
    terms.push_back(std::move(term));
  }
  return PairwiseEpistaticOracle(std::move(w), std::move(terms));
}

double PairwiseEpistaticOracle::value(const AntibodySequence& seq) const {
  require(seq.length() == weights_.size(), "PairwiseEpistaticOracle::value: length mismatch");
  require(!seq.contains_mask(), "PairwiseEpistaticOracle::value: MASK present");
  double total = 0;
  for (std::size_t l = 0; l < seq.length(); ++l) total += weights_[l][seq.residues[l]];
  for (const auto& pair : pairs_) {
    total += pair.table[seq.residues[pair.first]][seq.residues[pair.second]];
  }
  return total;
}

LogitsRow PairwiseEpistaticOracle::point_scores(const AntibodySequence& seq,
                                                std::size_t position) const {
  check_query(seq, position, weights_.size());
  // value(seq with position -> i), with the shared part factored out.
  double rest = 0;
  for (std::size_t l = 0; l < seq.length(); ++l) {
    if (l != position) rest += weights_[l][seq.residues[l]];
  }
  LogitsRow out;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] = weights_[position][i] + rest;
  for (const auto& pair : pairs_) {
    if (pair.first == position) {
      for (std::size_t i = 0; i < kAlphabetSize; ++i) {
        out[i] += pair.table[i][seq.residues[pair.second]];
      }
    } else if (pair.second == position) {
      for (std::size_t i = 0; i < kAlphabetSize; ++i) {
        out[i] += pair.table[seq.residues[pair.first]][i];
      }
    } else {
      const double c = pair.table[seq.residues[pair.first]][seq.residues[pair.second]];
      for (double& v : out) v += c;
    }
  }
  return out;
}

}  // namespace humanizer::testkit
