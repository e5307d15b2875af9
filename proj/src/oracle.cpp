#include "humanizer/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "humanizer/error.hpp"
#include "humanizer/matrix_io.hpp"

namespace humanizer {

double oracle_value(const AttributeOracle& oracle, const AntibodySequence& seq) {
  require(!seq.contains_mask(), "oracle_value: sequence '", seq.id, "' contains MASK");
  require(seq.length() > 0, "oracle_value: empty sequence");
  return oracle.point_scores(seq, 0)[seq.residues[0]];
}

EnsembleOracle::EnsembleOracle(std::vector<std::shared_ptr<const AttributeOracle>> members,
                               EnsembleReduction reduction)
    : members_(std::move(members)), reduction_(reduction) {
  require(!members_.empty(), "EnsembleOracle: no members");
}

LogitsRow EnsembleOracle::point_scores(const AntibodySequence& seq,
                                       std::size_t position) const {
  LogitsRow out = members_.front()->point_scores(seq, position);
  if (reduction_ == EnsembleReduction::minimum) {
    for (std::size_t k = 1; k < members_.size(); ++k) {
      const LogitsRow s = members_[k]->point_scores(seq, position);
      for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] = std::min(out[i], s[i]);
    }
  } else {
    for (std::size_t k = 1; k < members_.size(); ++k) {
      const LogitsRow s = members_[k]->point_scores(seq, position);
      for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] += s[i];
    }
    for (double& v : out) v /= static_cast<double>(members_.size());
  }
  return out;
}

double OracleScoreMatrix::approx_value(const AntibodySequence& seq,
                                       const AntibodySequence& starter) const {
  require(seq.length() == length() && starter.length() == length(),
          "OracleScoreMatrix::approx_value: length mismatch");
  require(!seq.contains_mask() && !starter.contains_mask(),
          "OracleScoreMatrix::approx_value: MASK present");
  // values[0][starter[0]] is the oracle at the starter itself.
  double score = values[0][starter.residues[0]];
  for (std::size_t l = 0; l < length(); ++l) {
    if (seq.residues[l] != starter.residues[l]) {
      score += values[l][seq.residues[l]] - values[l][starter.residues[l]];
    }
  }
  return score;
}

OracleScoreMatrix cache_oracle(const AttributeOracle& oracle,
                               const AntibodySequence& starter) {
  require(!starter.contains_mask(), "cache_oracle: starter '", starter.id,
          "' contains MASK");
  OracleScoreMatrix matrix;
  matrix.starter_hash = sequence_hash(starter);
  matrix.values.reserve(starter.length());
  for (std::size_t l = 0; l < starter.length(); ++l) {
    LogitsRow row;
    try {
      row = oracle.point_scores(starter, l);
    } catch (const Error& e) {
      fail("cache_oracle: oracle failed at position ", l + 1, ": ", e.what());
    }
    for (double v : row) {
      require(std::isfinite(v), "cache_oracle: non-finite oracle score at position ", l + 1);
    }
    matrix.values.push_back(row);
  }
  return matrix;
}

LogitsRow cached_point_scores(const OracleScoreMatrix& matrix, const AntibodySequence& seq,
                              std::size_t position) {
  require(seq.length() == matrix.length(), "cached_point_scores: sequence length ",
          seq.length(), " does not match matrix length ", matrix.length());
  require(position < matrix.length(), "cached_point_scores: position ", position,
          " out of range");
  return matrix.values[position];
}

OracleScoreMatrix load_score_matrix_tsv(const std::string& path) {
  const MatrixTsv tsv = load_matrix_tsv(path);
  OracleScoreMatrix matrix;
  matrix.values = tsv.rows;
  for (const auto& comment : tsv.comments) {
    constexpr const char* kTag = "starter_hash=";
    if (comment.rfind(kTag, 0) == 0) {
      matrix.starter_hash = std::stoull(comment.substr(std::string(kTag).size()), nullptr, 16);
    }
  }
  return matrix;
}

void save_score_matrix_tsv(const std::string& path, const OracleScoreMatrix& matrix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "starter_hash=%016llx",
                static_cast<unsigned long long>(matrix.starter_hash));
  save_matrix_tsv(path, matrix.values, {buf});
}

FreshOracleSource::FreshOracleSource(std::shared_ptr<const AttributeOracle> oracle,
                                     AntibodySequence starter)
    : oracle_(std::move(oracle)), starter_(std::move(starter)) {
  require(oracle_ != nullptr, "FreshOracleSource: null oracle");
  require(!starter_.contains_mask(), "FreshOracleSource: starter contains MASK");
}

LogitsRow FreshOracleSource::point_scores(const AntibodySequence& seq,
                                          std::size_t position) const {
  require(seq.length() == starter_.length(), "FreshOracleSource: length mismatch");
  if (!seq.contains_mask()) {
    return oracle_->point_scores(seq, position);
  }
  AntibodySequence view = seq;
  for (std::size_t l = 0; l < view.length(); ++l) {
    if (view.residues[l] == kMaskResidue) view.residues[l] = starter_.residues[l];
  }
  return oracle_->point_scores(view, position);
}

}  // namespace humanizer
