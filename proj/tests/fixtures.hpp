#pragma once

// Shared synthetic fixtures for the test and acceptance suites.

#include <cstdint>
#include <vector>

#include "humanizer/rng.hpp"
#include "humanizer/sequence.hpp"

namespace humanizer::fixtures {

inline AntibodySequence random_sequence(std::size_t length, std::uint64_t seed,
                                        const std::string& id = "seq") {
  Rng rng(seed);
  AntibodySequence seq;
  seq.id = id;
  for (std::size_t i = 0; i < length; ++i) {
    seq.residues.push_back(static_cast<Residue>(rng.next_below(kAlphabetSize)));
  }
  return seq;
}

/// Consensus corrupted independently per position with the given rate.
inline std::vector<AntibodySequence> noisy_corpus(const AntibodySequence& consensus,
                                                  std::size_t n, double noise,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<AntibodySequence> corpus;
  for (std::size_t i = 0; i < n; ++i) {
    AntibodySequence seq = consensus;
    seq.id = "c" + std::to_string(i);
    for (auto& r : seq.residues) {
      if (rng.next_double() < noise) r = static_cast<Residue>(rng.next_below(kAlphabetSize));
    }
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

/// Corpus with a coupled residue pair at (pa, pb) built so the marginal
/// argmaxes disagree with the conditional argmaxes (populations (A,L) 40%,
/// (C,D) 35%, (A,D) 25%): infilling the pair one position at a time then
/// depends on the visit order.
inline std::vector<AntibodySequence> crossed_pair_corpus(const AntibodySequence& consensus,
                                                         std::size_t pa, std::size_t pb,
                                                         std::size_t n, double noise,
                                                         std::uint64_t seed) {
  Rng rng(seed);
  const Residue a = *residue_from_char('A');
  const Residue b = *residue_from_char('L');
  const Residue c = *residue_from_char('C');
  const Residue d = *residue_from_char('D');
  std::vector<AntibodySequence> corpus;
  for (std::size_t i = 0; i < n; ++i) {
    AntibodySequence seq = consensus;
    seq.id = "x" + std::to_string(i);
    for (std::size_t pos = 0; pos < seq.length(); ++pos) {
      if (pos == pa || pos == pb) continue;
      if (rng.next_double() < noise) {
        seq.residues[pos] = static_cast<Residue>(rng.next_below(kAlphabetSize));
      }
    }
    const double u = rng.next_double();
    if (u < 0.40) {
      seq.residues[pa] = a;
      seq.residues[pb] = b;
    } else if (u < 0.75) {
      seq.residues[pa] = c;
      seq.residues[pb] = d;
    } else {
      seq.residues[pa] = a;
      seq.residues[pb] = d;
    }
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

}  // namespace humanizer::fixtures
