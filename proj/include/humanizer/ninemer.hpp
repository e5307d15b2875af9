#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "humanizer/sequence.hpp"

namespace humanizer {

/// Subject-level 9-mer prevalence database: for each distinct 9-mer, the
/// fraction of corpus subjects whose repertoire contains it.
struct NinemerDatabase {
  std::unordered_map<std::string, double> prevalence;
  std::size_t subject_count = 0;
  double prevalence_threshold = 0.10;
};

using SubjectCorpus = std::vector<std::pair<std::string, std::vector<AntibodySequence>>>;

/// Counts each 9-mer once per subject, however often it recurs within that
/// subject's sequences.
NinemerDatabase build_ninemer_db(const SubjectCorpus& corpus, double threshold);

/// Groups FASTA records into subjects by id (repeated ids = one subject), in
/// first-appearance order.
SubjectCorpus group_by_subject(const std::vector<AntibodySequence>& records);

/// Fraction of the (L - 8) window 9-mers whose prevalence in the database
/// meets the threshold. OASis-style coverage score in [0, 1].
double ninemer_score(const AntibodySequence& seq, const NinemerDatabase& db);

/// TSV serialization: a header comment with subject_count and threshold,
/// then sorted (9-mer, prevalence) rows.
void save_ninemer_db(const std::string& path, const NinemerDatabase& db);
NinemerDatabase load_ninemer_db(const std::string& path);

}  // namespace humanizer
