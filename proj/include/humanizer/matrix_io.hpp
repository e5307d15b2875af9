#pragma once

#include <string>
#include <vector>

#include "humanizer/logits.hpp"

namespace humanizer {

/// Shared TSV layout for L x 20 matrices (oracle score matrices, additive
/// weight tables, frozen logits): optional '#'-prefixed comment lines, a
/// header row with the 20 alphabet letters, then L tab-separated data rows.
/// Values are in natural-log units where applicable.
struct MatrixTsv {
  std::vector<LogitsRow> rows;
  std::vector<std::string> comments;  // without leading "# "
};

MatrixTsv load_matrix_tsv(const std::string& path);

void save_matrix_tsv(const std::string& path, const std::vector<LogitsRow>& rows,
                     const std::vector<std::string>& comments = {});

}  // namespace humanizer
