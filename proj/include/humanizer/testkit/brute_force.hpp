#pragma once

#include <map>
#include <vector>

#include "humanizer/sampler.hpp"

namespace humanizer::testkit {

/// Exact joint distribution over the residues drawn at the masked positions,
/// keyed by outcome tuple in visit order.
struct ExactJointDistribution {
  std::map<std::vector<Residue>, double> probabilities;

  double total_probability() const;
};

/// Enumerates every outcome of a sampling trajectory (|I| <= 3, pinned visit
/// order), computing each probability as the product of per-step conditional
/// probabilities under exactly the masking rule of the chosen method,
/// including PoE combination when guidance is configured. Only the sampling
/// methods (unmasked, gibbs, ard) are meaningful here.
ExactJointDistribution brute_force_joint(const AntibodySequence& starter,
                                         const MutableMask& mask,
                                         const ConditionalSequenceModel& model,
                                         const SamplingConfig& config,
                                         std::span<const GuidanceTerm> guidance = {});

/// Total variation distance between two distributions on the same outcome
/// space; missing keys count as probability zero.
double tv_distance(const ExactJointDistribution& p, const ExactJointDistribution& q);

/// Empirical joint over `n_samples` runs of the configured method with the
/// pinned mask, seeded by mix64(seed, t).
ExactJointDistribution empirical_joint(const AntibodySequence& starter,
                                       const MutableMask& mask,
                                       const ConditionalSequenceModel& model,
                                       const SamplingConfig& config,
                                       std::span<const GuidanceTerm> guidance,
                                       std::size_t n_samples, std::uint64_t seed);

}  // namespace humanizer::testkit
