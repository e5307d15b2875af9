#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "humanizer/oracle.hpp"

namespace humanizer::testkit {

/// Exactly additive fitness landscape: value(x) = sum_l w[l][x_l]. Its point
/// scores differ from cached starter rows only by a constant shift, which a
/// softmax erases — the ground truth for the cached-approximation claims.
class AdditiveOracle : public AttributeOracle {
 public:
  explicit AdditiveOracle(std::vector<LogitsRow> weights);

  /// Independent N(0, scale)-ish weights drawn from a seeded generator.
  static AdditiveOracle random(std::size_t length, double scale, std::uint64_t seed);

  LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const override;

  /// The true landscape value of a mask-free sequence.
  double value(const AntibodySequence& seq) const;

  const std::vector<LogitsRow>& weights() const { return weights_; }

 private:
  std::vector<LogitsRow> weights_;
};

/// Additive table plus sparse pairwise interaction terms
/// e[(a, b)][residue_a][residue_b]; reduces to AdditiveOracle when the pair
/// list is empty. Stress case for the cached approximation's locality
/// assumption.
class PairwiseEpistaticOracle : public AttributeOracle {
 public:
  struct PairTerm {
    std::size_t first = 0;
    std::size_t second = 0;
    std::vector<LogitsRow> table;  // 20 x 20, indexed [residue_first][residue_second]
  };

  PairwiseEpistaticOracle(std::vector<LogitsRow> weights, std::vector<PairTerm> pairs);

  /// Random additive part plus one interaction table of magnitude epsilon for
  /// each listed pair.
  static PairwiseEpistaticOracle random(std::size_t length, double scale,
                                        std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                        double epsilon, std::uint64_t seed);

  LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const override;

  double value(const AntibodySequence& seq) const;

 private:
  std::vector<LogitsRow> weights_;
  std::vector<PairTerm> pairs_;
};

}  // namespace humanizer::testkit
