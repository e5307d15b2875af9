#include "humanizer/sampler.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <unordered_set>

#include "humanizer/error.hpp"

namespace humanizer {

std::string to_string(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::unmasked: return "unmasked";
    case SamplingMethod::gibbs: return "gibbs";
    case SamplingMethod::ard: return "ard";
    case SamplingMethod::sapiens_argmax: return "sapiens_argmax";
    case SamplingMethod::random_mask_argmax: return "random_mask_argmax";
    case SamplingMethod::iterative_mask_argmax: return "iterative_mask_argmax";
  }
  return "unknown";
}

SamplingMethod sampling_method_from_string(const std::string& s) {
  if (s == "unmasked") return SamplingMethod::unmasked;
  if (s == "gibbs") return SamplingMethod::gibbs;
  if (s == "ard") return SamplingMethod::ard;
  if (s == "sapiens_argmax") return SamplingMethod::sapiens_argmax;
  if (s == "random_mask_argmax") return SamplingMethod::random_mask_argmax;
  if (s == "iterative_mask_argmax") return SamplingMethod::iterative_mask_argmax;
  fail("unknown sampling method '", s, "'");
}

void SamplingConfig::validate() const {
  require(tau_mlm > 0, "SamplingConfig: tau_mlm must be positive, got ", tau_mlm);
  require(n_samples >= 1, "SamplingConfig: n_samples must be at least 1");
  require(p_mask > 0 && p_mask <= 1, "SamplingConfig: p_mask must be in (0, 1], got ",
          p_mask);
  require(max_argmax_rounds >= 1, "SamplingConfig: max_argmax_rounds must be at least 1");
}

namespace {

void check_runner_inputs(const AntibodySequence& starter, const MutableMask& mask,
                         const SamplingConfig& config,
                         std::span<const GuidanceTerm> guidance) {
  config.validate();
  require(!starter.contains_mask(), "sampler: starter '", starter.id, "' contains MASK");
  for (std::size_t pos : mask.indices) {
    require(pos < starter.length(), "sampler: mutable position ", pos,
            " out of range for length ", starter.length());
  }
  for (const auto& term : guidance) {
    require(term.source != nullptr, "sampler: guidance term '", term.name,
            "' has no score source");
    require(term.temperature > 0, "sampler: guidance term '", term.name,
            "' temperature must be positive");
  }
}

LogitsMatrix score_checked(const ConditionalSequenceModel& model,
                           const AntibodySequence& seq, std::size_t step,
                           std::size_t position) {
  LogitsMatrix z;
  try {
    z = model.score(seq);
  } catch (const std::exception& e) {
    fail("sampler: scorer failed at step ", step, " (position ", position + 1,
         "): ", e.what());
  }
  require(z.length() == seq.length(), "sampler: scorer returned ", z.length(),
          " rows for a length-", seq.length(), " sequence at step ", step);
  return z;
}

/// Combined PoE logits for one position of the working sequence.
LogitsRow combined_row(const LogitsRow& model_row, const AntibodySequence& work,
                       std::size_t position, const SamplingConfig& config,
                       std::span<const GuidanceTerm> guidance) {
  std::vector<LogitsRow> scores;
  std::vector<double> temps;
  scores.reserve(guidance.size());
  temps.reserve(guidance.size());
  for (const auto& term : guidance) {
    scores.push_back(term.source->point_scores(work, position));
    temps.push_back(term.temperature);
  }
  return poe_row(model_row, config.tau_mlm, scores, temps);
}

Residue sample_step(const AntibodySequence& work, std::size_t position, std::size_t step,
                    const ConditionalSequenceModel& model, const SamplingConfig& config,
                    std::span<const GuidanceTerm> guidance, Rng& rng, Trajectory* audit) {
  const LogitsMatrix z = score_checked(model, work, step, position);
  const LogitsRow combined = combined_row(z[position], work, position, config, guidance);
  const Residue sampled = sample_categorical(softmax_temp(combined, 1.0), rng);
  if (audit) audit->steps.push_back({step, position, z[position], combined, sampled});
  return sampled;
}

Candidate finalize(const AntibodySequence& starter, AntibodySequence result) {
  Candidate cand;
  result.id = starter.id;
  cand.mutations = diff(starter, result);
  cand.sequence = std::move(result);
  return cand;
}

}  // namespace

Candidate run_unmasked(const AntibodySequence& starter, const MutableMask& mask,
                       const ConditionalSequenceModel& model, const SamplingConfig& config,
                       std::span<const GuidanceTerm> guidance, Rng& rng, Trajectory* audit) {
  check_runner_inputs(starter, mask, config, guidance);
  AntibodySequence work = starter;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    const std::size_t pos = mask.indices[j];
    work.residues[pos] = sample_step(work, pos, j, model, config, guidance, rng, audit);
  }
  return finalize(starter, std::move(work));
}

Candidate run_gibbs(const AntibodySequence& starter, const MutableMask& mask,
                    const ConditionalSequenceModel& model, const SamplingConfig& config,
                    std::span<const GuidanceTerm> guidance, Rng& rng, Trajectory* audit) {
  check_runner_inputs(starter, mask, config, guidance);
  AntibodySequence work = starter;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    const std::size_t pos = mask.indices[j];
    work.residues[pos] = kMaskResidue;
    work.residues[pos] = sample_step(work, pos, j, model, config, guidance, rng, audit);
  }
  return finalize(starter, std::move(work));
}

Candidate run_ard(const AntibodySequence& starter, const MutableMask& mask,
                  const ConditionalSequenceModel& model, const SamplingConfig& config,
                  std::span<const GuidanceTerm> guidance, Rng& rng, Trajectory* audit) {
  check_runner_inputs(starter, mask, config, guidance);
  AntibodySequence work = starter;
  for (std::size_t pos : mask.indices) work.residues[pos] = kMaskResidue;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    const std::size_t pos = mask.indices[j];
    work.residues[pos] = sample_step(work, pos, j, model, config, guidance, rng, audit);
  }
  return finalize(starter, std::move(work));
}

Candidate run_sapiens_argmax(const AntibodySequence& starter, const MutableMask& mask,
                             const ConditionalSequenceModel& model,
                             const SamplingConfig& config,
                             std::span<const GuidanceTerm> guidance,
                             std::vector<std::string>* warnings) {
  check_runner_inputs(starter, mask, config, guidance);
  AntibodySequence work = starter;
  bool converged = mask.size() == 0;
  for (std::size_t round = 0; round < config.max_argmax_rounds && !converged; ++round) {
    const LogitsMatrix z = score_checked(model, work, round, 0);
    AntibodySequence next = work;
    for (std::size_t pos : mask.indices) {
      const LogitsRow combined = combined_row(z[pos], work, pos, config, guidance);
      next.residues[pos] = static_cast<Residue>(argmax_row(combined));
    }
    if (next.same_residues(work)) {
      converged = true;
    } else {
      work = std::move(next);
    }
  }
  if (!converged && warnings) {
    warnings->push_back(detail::concat("sapiens_argmax: no fixed point after ",
                                       config.max_argmax_rounds,
                                       " rounds; returning the last iterate"));
  }
  return finalize(starter, std::move(work));
}

Candidate run_random_masking_argmax(const AntibodySequence& starter, const MutableMask& mask,
                                    const ConditionalSequenceModel& model,
                                    const SamplingConfig& config,
                                    std::span<const GuidanceTerm> guidance, Rng& rng) {
  check_runner_inputs(starter, mask, config, guidance);
  if (mask.size() == 0) return finalize(starter, starter);
  AntibodySequence work = starter;
  std::vector<std::size_t> masked;
  for (std::size_t pos : mask.indices) {
    if (rng.next_double() < config.p_mask) masked.push_back(pos);
  }
  if (masked.empty()) {
    masked.push_back(mask.indices[rng.next_below(mask.size())]);
  }
  for (std::size_t pos : masked) work.residues[pos] = kMaskResidue;
  const LogitsMatrix z = score_checked(model, work, 0, masked.front());
  AntibodySequence infilled = work;
  for (std::size_t pos : masked) {
    const LogitsRow combined = combined_row(z[pos], work, pos, config, guidance);
    infilled.residues[pos] = static_cast<Residue>(argmax_row(combined));
  }
  return finalize(starter, std::move(infilled));
}

Candidate run_iterative_masking_argmax(const AntibodySequence& starter,
                                       const MutableMask& mask,
                                       const ConditionalSequenceModel& model,
                                       const SamplingConfig& config,
                                       std::span<const GuidanceTerm> guidance, Rng& rng) {
  check_runner_inputs(starter, mask, config, guidance);
  (void)rng;  // diversity comes from the per-trajectory mask shuffle
  AntibodySequence work = starter;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    const std::size_t pos = mask.indices[j];
    work.residues[pos] = kMaskResidue;
    const LogitsMatrix z = score_checked(model, work, j, pos);
    const LogitsRow combined = combined_row(z[pos], work, pos, config, guidance);
    work.residues[pos] = static_cast<Residue>(argmax_row(combined));
  }
  return finalize(starter, std::move(work));
}

Candidate run_method(const AntibodySequence& starter, const MutableMask& mask,
                     const ConditionalSequenceModel& model, const SamplingConfig& config,
                     std::span<const GuidanceTerm> guidance, Rng& rng, Trajectory* audit,
                     std::vector<std::string>* warnings) {
  switch (config.method) {
    case SamplingMethod::unmasked:
      return run_unmasked(starter, mask, model, config, guidance, rng, audit);
    case SamplingMethod::gibbs:
      return run_gibbs(starter, mask, model, config, guidance, rng, audit);
    case SamplingMethod::ard:
      return run_ard(starter, mask, model, config, guidance, rng, audit);
    case SamplingMethod::sapiens_argmax:
      return run_sapiens_argmax(starter, mask, model, config, guidance, warnings);
    case SamplingMethod::random_mask_argmax:
      return run_random_masking_argmax(starter, mask, model, config, guidance, rng);
    case SamplingMethod::iterative_mask_argmax:
      return run_iterative_masking_argmax(starter, mask, model, config, guidance, rng);
  }
  fail("run_method: unknown sampling method");
}

ModelProvider shared_model_provider(std::shared_ptr<const ConditionalSequenceModel> model) {
  return [model](std::size_t) { return model; };
}

namespace {

struct TrajectoryOutcome {
  Candidate candidate;
  Trajectory trajectory;
  std::vector<std::string> warnings;
};

}  // namespace

BatchResult generate_batch(const AntibodySequence& starter,
                           const RegionAnnotation& annotation, const ModelProvider& provider,
                           const SamplingConfig& config,
                           std::span<const GuidanceTerm> guidance,
                           const BatchOptions& options) {
  config.validate();
  require(!starter.contains_mask(), "generate_batch: starter '", starter.id,
          "' contains MASK");
  annotation.validate_for_length(starter.length());
  require(options.retry_factor >= 1, "generate_batch: retry_factor must be at least 1");

  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  const std::size_t cap =
      config.dedupe ? config.n_samples * options.retry_factor : config.n_samples;

  std::vector<std::shared_ptr<const ConditionalSequenceModel>> models(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    models[w] = provider(w);
    require(models[w] != nullptr, "generate_batch: model provider returned null");
  }

  auto run_one = [&](std::size_t t, const ConditionalSequenceModel& model,
                     TrajectoryOutcome& out) {
    const std::uint64_t seed = mix64(config.base_seed, t);
    Rng rng(seed);
    const MutableMask mask =
        build_mutable_mask(starter.length(), annotation, config.mask_policy, rng);
    Trajectory* audit = options.record_trajectories ? &out.trajectory : nullptr;
    out.candidate =
        run_method(starter, mask, model, config, guidance, rng, audit, &out.warnings);
    out.candidate.trajectory_seed = seed;
    out.trajectory.seed = seed;
  };

  BatchResult result;
  std::unordered_set<std::string> seen;
  std::size_t next_t = 0;
  bool done = false;

  const std::size_t wave_size = std::max<std::size_t>(workers * 8, 32);
  while (!done && next_t < cap) {
    const std::size_t wave_end = std::min(cap, next_t + wave_size);
    std::vector<TrajectoryOutcome> outcomes(wave_end - next_t);
    if (workers == 1) {
      for (std::size_t t = next_t; t < wave_end; ++t) {
        run_one(t, *models[0], outcomes[t - next_t]);
      }
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t t = next_t + w; t < wave_end; t += workers) {
              run_one(t, *models[w], outcomes[t - next_t]);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
      }
    }
    for (std::size_t t = next_t; t < wave_end && !done; ++t) {
      auto& outcome = outcomes[t - next_t];
      for (auto& w : outcome.warnings) {
        if (result.warnings.size() < 16) result.warnings.push_back(std::move(w));
      }
      if (config.dedupe) {
        const std::string key = outcome.candidate.sequence.to_string();
        if (!seen.insert(key).second) continue;
      }
      result.candidates.push_back(std::move(outcome.candidate));
      if (options.record_trajectories) {
        result.trajectories.push_back(std::move(outcome.trajectory));
      }
      result.trajectories_run = t + 1;
      if (result.candidates.size() >= config.n_samples) done = true;
    }
    if (!done) result.trajectories_run = wave_end;
    next_t = wave_end;
  }

  if (result.candidates.size() < config.n_samples) {
    result.shortfall = config.n_samples - result.candidates.size();
    result.warnings.push_back(detail::concat(
        "generate_batch: retry cap of ", cap, " trajectories reached with ",
        result.candidates.size(), " unique candidates (", result.shortfall, " short)"));
  }
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    result.candidates[i].sequence.id = "cand_" + std::to_string(i + 1);
  }
  return result;
}

BatchResult generate_batch(const AntibodySequence& starter,
                           const RegionAnnotation& annotation,
                           const ConditionalSequenceModel& model,
                           const SamplingConfig& config,
                           std::span<const GuidanceTerm> guidance,
                           const BatchOptions& options) {
  std::shared_ptr<const ConditionalSequenceModel> alias(
      std::shared_ptr<const ConditionalSequenceModel>{}, &model);
  return generate_batch(starter, annotation, shared_model_provider(alias), config, guidance,
                        options);
}

}  // namespace humanizer
