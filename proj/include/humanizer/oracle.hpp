#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "humanizer/logits.hpp"
#include "humanizer/sequence.hpp"

namespace humanizer {

/// Attribute scoring model (binding affinity, thermostability, structural
/// deviation, ...). point_scores(seq, l)[i] is the oracle's score for the
/// sequence with position l set to residue i; higher is better and values
/// are interpreted as log-probability contributions. The residue currently
/// at position l does not influence the result. Implementations must be
/// deterministic and finite.
class AttributeOracle {
 public:
  virtual ~AttributeOracle() = default;

  virtual LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const = 0;
};

/// Whole-sequence oracle score: the point score of keeping position 0 as it
/// is, i.e. the oracle evaluated at the sequence itself.
double oracle_value(const AttributeOracle& oracle, const AntibodySequence& seq);

enum class EnsembleReduction { minimum, mean };

/// Combines member oracles elementwise. The paper-faithful reduction is the
/// minimum (a lower bound on the property); mean is available behind a flag.
class EnsembleOracle : public AttributeOracle {
 public:
  explicit EnsembleOracle(std::vector<std::shared_ptr<const AttributeOracle>> members,
                          EnsembleReduction reduction = EnsembleReduction::minimum);

  LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const override;

 private:
  std::vector<std::shared_ptr<const AttributeOracle>> members_;
  EnsembleReduction reduction_;
};

/// Precomputed oracle scores for every single point mutation of a starter
/// sequence: values[l][i] = oracle score of the starter with position l set
/// to residue i. Reusing these rows during sampling is the cached oracle
/// approximation, exact at Hamming distance 1 from the starter.
struct OracleScoreMatrix {
  std::vector<LogitsRow> values;
  std::uint64_t starter_hash = 0;

  std::size_t length() const { return values.size(); }
  bool matches(const AntibodySequence& starter) const {
    return starter_hash == sequence_hash(starter);
  }

  /// Additive reconstruction of the oracle value of `seq`:
  /// base score plus the cached per-position deltas of its mutations vs the
  /// starter. Exact for additive oracles; the distance-<=1 approximation
  /// otherwise.
  double approx_value(const AntibodySequence& seq, const AntibodySequence& starter) const;
};

/// Evaluates the oracle for all possible single mutations of the starter
/// (L x 20 point evaluations, realized as L point_scores calls).
OracleScoreMatrix cache_oracle(const AttributeOracle& oracle,
                               const AntibodySequence& starter);

/// Row l of the matrix, regardless of mutations elsewhere in `seq`.
LogitsRow cached_point_scores(const OracleScoreMatrix& matrix, const AntibodySequence& seq,
                              std::size_t position);

OracleScoreMatrix load_score_matrix_tsv(const std::string& path);
void save_score_matrix_tsv(const std::string& path, const OracleScoreMatrix& matrix);

/// Where guided sampling gets per-position score rows from: either a cached
/// starter matrix or a live oracle. Sequences passed in may contain MASK at
/// positions the sampler has not filled yet; implementations never forward
/// MASK to an underlying oracle.
class PointScoreSource {
 public:
  virtual ~PointScoreSource() = default;

  virtual LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const = 0;
};

class CachedMatrixSource : public PointScoreSource {
 public:
  explicit CachedMatrixSource(OracleScoreMatrix matrix) : matrix_(std::move(matrix)) {}

  LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const override {
    return cached_point_scores(matrix_, seq, position);
  }

  const OracleScoreMatrix& matrix() const { return matrix_; }

 private:
  OracleScoreMatrix matrix_;
};

/// Fresh-mode guidance: re-evaluates the oracle on the current sequence at
/// every step. Masked positions are substituted with the starter's residues
/// before the oracle sees the sequence.
class FreshOracleSource : public PointScoreSource {
 public:
  FreshOracleSource(std::shared_ptr<const AttributeOracle> oracle, AntibodySequence starter);

  LogitsRow point_scores(const AntibodySequence& seq, std::size_t position) const override;

 private:
  std::shared_ptr<const AttributeOracle> oracle_;
  AntibodySequence starter_;
};

}  // namespace humanizer
