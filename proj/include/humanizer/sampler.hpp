#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "humanizer/annotation.hpp"
#include "humanizer/candidate.hpp"
#include "humanizer/mask.hpp"
#include "humanizer/model.hpp"
#include "humanizer/oracle.hpp"
#include "humanizer/rng.hpp"

namespace humanizer {

enum class SamplingMethod {
  unmasked,
  gibbs,
  ard,
  sapiens_argmax,
  random_mask_argmax,
  iterative_mask_argmax,
};

std::string to_string(SamplingMethod method);
SamplingMethod sampling_method_from_string(const std::string& s);

constexpr bool is_sampling_method(SamplingMethod m) {
  return m == SamplingMethod::unmasked || m == SamplingMethod::gibbs ||
         m == SamplingMethod::ard;
}

/// One expert in the per-position product of experts.
struct GuidanceTerm {
  std::string name;
  std::shared_ptr<const PointScoreSource> source;
  double temperature = 0.4;  // tau_k
};

struct SamplingConfig {
  SamplingMethod method = SamplingMethod::unmasked;
  double tau_mlm = 1.0;
  MaskPolicy mask_policy = FrameworkAll{};
  std::size_t n_samples = 1;
  std::uint64_t base_seed = 0;
  bool dedupe = true;
  double p_mask = 0.5;                // random_mask_argmax only
  std::size_t max_argmax_rounds = 10;  // sapiens_argmax only

  void validate() const;
};

/// Audit record of one trajectory, serializable as JSON lines when the debug
/// flag is set.
struct StepRecord {
  std::size_t step = 0;
  std::size_t position = 0;
  LogitsRow model_logits{};
  LogitsRow combined_logits{};
  Residue sampled = 0;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
};

// Single-trajectory runners. The mask order is consumed verbatim as the
// visit order; generate_batch shuffles it per trajectory, and tests that
// need exactness pin it explicitly.

/// Scores the current, never-masked sequence at each step and samples the
/// visited row.
Candidate run_unmasked(const AntibodySequence& starter, const MutableMask& mask,
                       const ConditionalSequenceModel& model, const SamplingConfig& config,
                       std::span<const GuidanceTerm> guidance, Rng& rng,
                       Trajectory* audit = nullptr);

/// Masks only the visited position before scoring it, one sweep over the
/// mask.
Candidate run_gibbs(const AntibodySequence& starter, const MutableMask& mask,
                    const ConditionalSequenceModel& model, const SamplingConfig& config,
                    std::span<const GuidanceTerm> guidance, Rng& rng,
                    Trajectory* audit = nullptr);

/// Masks every mutable position up front and progressively infills, so later
/// steps condition on earlier draws while unvisited positions stay masked.
Candidate run_ard(const AntibodySequence& starter, const MutableMask& mask,
                  const ConditionalSequenceModel& model, const SamplingConfig& config,
                  std::span<const GuidanceTerm> guidance, Rng& rng,
                  Trajectory* audit = nullptr);

/// Repeated simultaneous argmax infill of the unmasked sequence, stopping at
/// a fixed point or after max_argmax_rounds (with a warning). Deterministic.
Candidate run_sapiens_argmax(const AntibodySequence& starter, const MutableMask& mask,
                             const ConditionalSequenceModel& model,
                             const SamplingConfig& config,
                             std::span<const GuidanceTerm> guidance,
                             std::vector<std::string>* warnings = nullptr);

/// Masks each mutable position independently with probability p_mask (at
/// least one forced), scores once, and argmax-infills the masked subset.
Candidate run_random_masking_argmax(const AntibodySequence& starter, const MutableMask& mask,
                                    const ConditionalSequenceModel& model,
                                    const SamplingConfig& config,
                                    std::span<const GuidanceTerm> guidance, Rng& rng);

/// Masks, scores and argmax-infills one mutable position at a time, in the
/// mask's visit order.
Candidate run_iterative_masking_argmax(const AntibodySequence& starter,
                                       const MutableMask& mask,
                                       const ConditionalSequenceModel& model,
                                       const SamplingConfig& config,
                                       std::span<const GuidanceTerm> guidance, Rng& rng);

/// Dispatch on config.method.
Candidate run_method(const AntibodySequence& starter, const MutableMask& mask,
                     const ConditionalSequenceModel& model, const SamplingConfig& config,
                     std::span<const GuidanceTerm> guidance, Rng& rng,
                     Trajectory* audit = nullptr,
                     std::vector<std::string>* warnings = nullptr);

/// Hands each worker its own model instance. Stateless models may return one
/// shared instance; the external scorer spawns one child per worker.
using ModelProvider =
    std::function<std::shared_ptr<const ConditionalSequenceModel>(std::size_t worker)>;

ModelProvider shared_model_provider(std::shared_ptr<const ConditionalSequenceModel> model);

struct BatchOptions {
  std::size_t workers = 1;
  std::size_t retry_factor = 10;  // dedupe retry cap = retry_factor * n_samples
  bool record_trajectories = false;
};

struct BatchResult {
  std::vector<Candidate> candidates;
  std::vector<Trajectory> trajectories;  // parallel to candidates when recorded
  std::size_t trajectories_run = 0;
  std::size_t shortfall = 0;  // unique candidates still missing at the retry cap
  std::vector<std::string> warnings;
};

/// Runs independent trajectories; trajectory t is seeded by
/// mix64(base_seed, t) and, under the random_bounded policy, draws a fresh
/// mutable mask. Results are accumulated in trajectory order, so output is
/// identical for any worker count.
BatchResult generate_batch(const AntibodySequence& starter,
                           const RegionAnnotation& annotation, const ModelProvider& provider,
                           const SamplingConfig& config,
                           std::span<const GuidanceTerm> guidance,
                           const BatchOptions& options = {});

/// Convenience overload sharing one model across workers.
BatchResult generate_batch(const AntibodySequence& starter,
                           const RegionAnnotation& annotation,
                           const ConditionalSequenceModel& model, const SamplingConfig& config,
                           std::span<const GuidanceTerm> guidance = {},
                           const BatchOptions& options = {});

}  // namespace humanizer
