#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "humanizer/annotation.hpp"
#include "humanizer/candidate.hpp"
#include "humanizer/filters.hpp"
#include "humanizer/sampler.hpp"
#include "humanizer/selection.hpp"

namespace humanizer {

struct ScorerSpec {
  enum class Kind { profile_file, profile_corpus, external, logits_file };
  Kind kind = Kind::profile_file;
  std::string path;     // model file, corpus FASTA, or logits TSV
  double alpha = 1.0;   // profile_corpus
  double lambda = 0.7;  // profile_corpus
  std::string command;  // external
  std::int64_t timeout_ms = 30000;
};

struct OracleSpec {
  enum class Kind { cached_matrix, additive_weights, structure };
  Kind kind = Kind::cached_matrix;
  std::string name;  // report column
  std::string path;  // score matrix TSV or additive weights TSV
  std::string starter_coords;     // structure
  std::string mutant_coords_dir;  // structure; files named pos<P>_<R>.xyz, 1-based P
  double tau = 0.4;
  bool cached = true;  // additive_weights: cached starter matrix vs fresh re-evaluation
};

struct SelectionSpec {
  enum class Mode { none, ranked, unranked };
  Mode mode = Mode::none;
  std::size_t k = 10;
  std::string oracle;  // ranked mode
};

struct CampaignConfig {
  std::string starter_path;
  std::string annotation_path;
  std::string output_dir;
  ScorerSpec scorer;
  std::vector<OracleSpec> oracles;

  SamplingMethod method = SamplingMethod::unmasked;
  double tau_mlm = 1.0;
  std::string mask_policy = "framework_all";  // or "random_bounded"
  std::size_t max_total = 6;
  std::size_t max_cdr = 2;
  std::size_t n_samples = 100;
  std::uint64_t base_seed = 0;
  bool dedupe = true;
  double p_mask = 0.5;
  std::size_t max_argmax_rounds = 10;

  bool filters_enabled = true;
  LiabilityFilterConfig filter_config;
  bool require_improved_humanness = false;
  bool require_improved_oracle = false;
  SelectionSpec selection;

  std::string ninemer_db_path;
  std::string percentile_ref_path;

  std::size_t rounds = 1;
  std::size_t workers = 1;
  bool write_trajectories = false;

  MaskPolicy make_mask_policy() const;
  void validate() const;
};

/// Reads a campaign config JSON file; relative paths inside resolve against
/// the config file's directory.
CampaignConfig load_campaign_config(const std::string& path);

std::string campaign_config_to_json(const CampaignConfig& config);

struct RoundResult {
  std::size_t round = 1;
  AntibodySequence starter;
  std::map<std::string, double> starter_scores;
  std::vector<Candidate> candidates;  // scored, filtered, rank set on selected
  std::vector<Candidate> selected;
  std::size_t trajectories_run = 0;
  std::size_t shortfall = 0;
  UniqueImproved unique_improved;
  std::string humanness_metric;  // drives the improved counts
  std::vector<std::string> warnings;
};

struct CampaignResult {
  std::vector<RoundResult> rounds;
  std::vector<std::string> warnings;
};

/// Full humanization campaign: per round, build masks, generate, score,
/// filter, select, and write candidates.csv / summary.json (and
/// trajectories.jsonl with the debug flag) into the output directory (per
/// round subdirectories when rounds > 1). The top-ranked filter-passing
/// candidate seeds the next round. (config, base_seed) fully determines all
/// output bytes.
CampaignResult run_campaign(const CampaignConfig& config);

/// CSV schema shared by run_campaign and tests.
std::vector<std::string> candidates_csv_columns(const CampaignConfig& config);
void write_candidates_csv(const std::string& path, const std::vector<Candidate>& candidates,
                          const std::vector<std::string>& columns);

}  // namespace humanizer
