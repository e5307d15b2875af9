#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "humanizer/model.hpp"

namespace humanizer {

/// Reference realization of the conditional-model contract: a per-position
/// profile interpolated with a flanking-pair conditional term.
///
/// Row l of the output is log(lambda * C-term + (1 - lambda) * U-term), where
/// the U-term is the smoothed position-l residue frequency and the C-term is
/// the smoothed residue frequency conditioned on the immediate flanking pair
/// (seq[l-1], seq[l+1]). When either flank is MASK or out of range the row
/// backs off to the U-term alone, so masked and unmasked scoring genuinely
/// differ and the masking strategies are distinguishable.
class ContextProfileModel : public ConditionalSequenceModel {
 public:
  LogitsMatrix score(const AntibodySequence& seq) const override;

  std::size_t length() const { return unigram_.size(); }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  std::size_t corpus_size() const { return corpus_size_; }

  void save(const std::string& path) const;
  static ContextProfileModel load(const std::string& path);

  friend ContextProfileModel train_context_profile(std::span<const AntibodySequence> corpus,
                                                   double alpha, double lambda);

 private:
  // Context key: left * 20 + right.
  using ContextMap = std::unordered_map<std::uint16_t, LogitsRow>;

  LogitsRow row_for(std::size_t l, Residue left, Residue right) const;

  std::vector<LogitsRow> unigram_;      // U[l][r], log-frequencies
  std::vector<ContextMap> contexts_;    // C[l], empty maps at the edges
  double alpha_ = 1.0;
  double lambda_ = 0.7;
  double log_unseen_ = 0;               // log(1/20), the smoothed unseen-context term
  std::size_t corpus_size_ = 0;
};

/// Trains the profile from an equal-length, mask-free corpus with pseudocount
/// `alpha` > 0 and interpolation weight `lambda` in [0, 1].
ContextProfileModel train_context_profile(std::span<const AntibodySequence> corpus,
                                          double alpha, double lambda);

}  // namespace humanizer
