#pragma once

#include <memory>
#include <string>

#include "humanizer/logits.hpp"
#include "humanizer/sequence.hpp"

namespace humanizer {

/// Position-wise conditional sequence model. Implementations must be
/// deterministic: the same input sequence yields an identical matrix. The
/// input may contain MASK residues; rows are unnormalized log-probabilities
/// over the 20-letter alphabet.
class ConditionalSequenceModel {
 public:
  virtual ~ConditionalSequenceModel() = default;

  virtual LogitsMatrix score(const AntibodySequence& seq) const = 0;
};

/// Scorer that replays a fixed logits matrix for any input of the right
/// length. Backs the `logits-file` scorer spec and hand-built test models.
class FixedLogitsModel : public ConditionalSequenceModel {
 public:
  explicit FixedLogitsModel(LogitsMatrix matrix);

  LogitsMatrix score(const AntibodySequence& seq) const override;

 private:
  LogitsMatrix matrix_;
};

/// Sum over positions of log softmax(z_l, tau=1)[seq[l]], in nats. The
/// sequence must not contain MASK.
double sequence_log_likelihood(const ConditionalSequenceModel& model,
                               const AntibodySequence& seq);

/// Loads a TSV logits matrix (header row = alphabet letters, L data rows)
/// into a FixedLogitsModel.
std::shared_ptr<FixedLogitsModel> load_logits_file_model(const std::string& path);

}  // namespace humanizer
