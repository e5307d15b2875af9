#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "humanizer/annotation.hpp"
#include "humanizer/ninemer.hpp"
#include "humanizer/sequence.hpp"

namespace humanizer::testkit {

struct PlantedMotif {
  std::size_t subject_index = 0;
  std::size_t sequence_index = 0;  // within the subject
  std::string filter;              // "ddd", "nglyc", or "cys"
  std::size_t position = 0;        // 0-based motif start / cysteine position
};

/// Synthetic corpus with exactly known liability motifs: base sequences are
/// scrubbed of every motif the filters detect, canonical cysteines are fixed
/// per the annotation, and the listed plants are the only occurrences.
struct PlantedCorpus {
  SubjectCorpus subjects;
  RegionAnnotation annotation;
  std::vector<PlantedMotif> motifs;
};

/// `liability_rate` is the per-sequence, per-class probability of planting
/// one motif of that class. Deterministic in the seed.
PlantedCorpus make_planted_corpus(std::uint64_t seed, std::size_t n_subjects,
                                  std::size_t length, double liability_rate);

}  // namespace humanizer::testkit
