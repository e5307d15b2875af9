#pragma once

#include <string>
#include <vector>

namespace humanizer {

/// Sorted humanness scores of a user-supplied reference antibody set.
struct PercentileReference {
  std::vector<double> scores;  // ascending
};

PercentileReference make_percentile_reference(std::vector<double> scores);

/// One score per line.
PercentileReference load_percentile_reference(const std::string& path);
void save_percentile_reference(const std::string& path, const PercentileReference& ref);

/// Fraction of reference scores strictly less than `score`; ties map to the
/// lower percentile.
double percentile(double score, const PercentileReference& ref);

}  // namespace humanizer
