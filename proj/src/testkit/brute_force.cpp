#include "humanizer/testkit/brute_force.hpp"

#include <cmath>

#include "humanizer/error.hpp"

namespace humanizer::testkit {

double ExactJointDistribution::total_probability() const {
  double total = 0;
  for (const auto& [outcome, p] : probabilities) total += p;
  return total;
}

namespace {

struct Enumerator {
  const MutableMask& mask;
  const ConditionalSequenceModel& model;
  const SamplingConfig& config;
  std::span<const GuidanceTerm> guidance;
  ExactJointDistribution joint;

  /// Per-step conditional distribution at visit step j, given the working
  /// sequence with all prior infills applied and this method's masking rule.
  LogitsRow step_distribution(AntibodySequence& work, std::size_t j) {
    const std::size_t pos = mask.indices[j];
    const Residue saved = work.residues[pos];
    if (config.method == SamplingMethod::gibbs) work.residues[pos] = kMaskResidue;
    // For ARD, positions j.. are already masked by the caller.
    const LogitsMatrix z = model.score(work);
    std::vector<LogitsRow> scores;
    std::vector<double> temps;
    for (const auto& term : guidance) {
      scores.push_back(term.source->point_scores(work, pos));
      temps.push_back(term.temperature);
    }
    const LogitsRow combined = poe_row(z[pos], config.tau_mlm, scores, temps);
    if (config.method == SamplingMethod::gibbs) work.residues[pos] = saved;
    return softmax_temp(combined, 1.0);
  }

  void recurse(AntibodySequence& work, std::size_t j, std::vector<Residue>& outcome,
               double probability) {
    if (j == mask.size()) {
      joint.probabilities[outcome] += probability;
      return;
    }
    const std::size_t pos = mask.indices[j];
    const LogitsRow p = step_distribution(work, j);
    const Residue saved = work.residues[pos];
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      if (p[i] == 0) continue;
      work.residues[pos] = static_cast<Residue>(i);
      outcome.push_back(static_cast<Residue>(i));
      recurse(work, j + 1, outcome, probability * p[i]);
      outcome.pop_back();
    }
    work.residues[pos] = saved;
  }
};

}  // namespace

ExactJointDistribution brute_force_joint(const AntibodySequence& starter,
                                         const MutableMask& mask,
                                         const ConditionalSequenceModel& model,
                                         const SamplingConfig& config,
                                         std::span<const GuidanceTerm> guidance) {
  require(mask.size() <= 3, "brute_force_joint: at most 3 masked positions, got ",
          mask.size());
  require(is_sampling_method(config.method),
          "brute_force_joint: only the sampling methods (unmasked, gibbs, ard) have a "
          "chained-conditional joint");
  require(!starter.contains_mask(), "brute_force_joint: starter contains MASK");
  config.validate();

  Enumerator enumerator{mask, model, config, guidance, {}};
  AntibodySequence work = starter;
  if (config.method == SamplingMethod::ard) {
    for (std::size_t pos : mask.indices) work.residues[pos] = kMaskResidue;
  }
  std::vector<Residue> outcome;
  enumerator.recurse(work, 0, outcome, 1.0);
  return std::move(enumerator.joint);
}

double tv_distance(const ExactJointDistribution& p, const ExactJointDistribution& q) {
  std::size_t key_size = 0;
  if (!p.probabilities.empty()) key_size = p.probabilities.begin()->first.size();
  else if (!q.probabilities.empty()) key_size = q.probabilities.begin()->first.size();
  double total = 0;
  for (const auto& [outcome, prob] : p.probabilities) {
    require(outcome.size() == key_size, "tv_distance: outcome spaces do not match");
    const auto it = q.probabilities.find(outcome);
    const double other = it != q.probabilities.end() ? it->second : 0.0;
    total += std::abs(prob - other);
  }
  for (const auto& [outcome, prob] : q.probabilities) {
    require(outcome.size() == key_size, "tv_distance: outcome spaces do not match");
    if (!p.probabilities.count(outcome)) total += prob;
  }
  return total / 2;
}

ExactJointDistribution empirical_joint(const AntibodySequence& starter,
                                       const MutableMask& mask,
                                       const ConditionalSequenceModel& model,
                                       const SamplingConfig& config,
                                       std::span<const GuidanceTerm> guidance,
                                       std::size_t n_samples, std::uint64_t seed) {
  ExactJointDistribution joint;
  const double weight = 1.0 / static_cast<double>(n_samples);
  std::vector<Residue> outcome(mask.size());
  for (std::size_t t = 0; t < n_samples; ++t) {
    Rng rng(mix64(seed, t));
    const Candidate cand = run_method(starter, mask, model, config, guidance, rng);
    for (std::size_t j = 0; j < mask.size(); ++j) {
      outcome[j] = cand.sequence.residues[mask.indices[j]];
    }
    joint.probabilities[outcome] += weight;
  }
  return joint;
}

}  // namespace humanizer::testkit
