#include "humanizer/model.hpp"

#include "humanizer/error.hpp"
#include "humanizer/matrix_io.hpp"

namespace humanizer {

FixedLogitsModel::FixedLogitsModel(LogitsMatrix matrix) : matrix_(std::move(matrix)) {
  require(matrix_.length() > 0, "FixedLogitsModel: empty matrix");
  require(matrix_.all_finite(), "FixedLogitsModel: matrix contains non-finite values");
}

LogitsMatrix FixedLogitsModel::score(const AntibodySequence& seq) const {
  require(seq.length() == matrix_.length(), "FixedLogitsModel: sequence length ",
          seq.length(), " does not match matrix length ", matrix_.length());
  return matrix_;
}

double sequence_log_likelihood(const ConditionalSequenceModel& model,
                               const AntibodySequence& seq) {
  require(!seq.contains_mask(),
          "sequence_log_likelihood: sequence '", seq.id, "' contains MASK");
  const LogitsMatrix z = model.score(seq);
  require(z.length() == seq.length(), "sequence_log_likelihood: model returned ",
          z.length(), " rows for a length-", seq.length(), " sequence");
  double total = 0;
  for (std::size_t l = 0; l < seq.length(); ++l) {
    total += log_softmax(z[l])[seq.residues[l]];
  }
  return total;
}

std::shared_ptr<FixedLogitsModel> load_logits_file_model(const std::string& path) {
  return std::make_shared<FixedLogitsModel>(LogitsMatrix{load_matrix_tsv(path).rows});
}

}  // namespace humanizer
