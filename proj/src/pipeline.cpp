#include "humanizer/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "humanizer/context_profile.hpp"
#include "humanizer/error.hpp"
#include "humanizer/external_scorer.hpp"
#include "humanizer/fasta.hpp"
#include "humanizer/matrix_io.hpp"
#include "humanizer/ninemer.hpp"
#include "humanizer/percentile.hpp"
#include "humanizer/structure.hpp"
#include "humanizer/testkit/oracles.hpp"
#include "humanizer/testkit/stats.hpp"

namespace humanizer {

namespace fs = std::filesystem;

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  require(!path.empty(), "campaign config: missing ", what, " path");
  require(fs::exists(path), "campaign config: ", what, " path does not exist: ", path);
}

}  // namespace

MaskPolicy CampaignConfig::make_mask_policy() const {
  if (mask_policy == "framework_all") return FrameworkAll{};
  if (mask_policy == "random_bounded") return RandomBounded{max_total, max_cdr};
  fail("campaign config: unknown mask_policy '", mask_policy,
       "' (expected framework_all or random_bounded)");
}

void CampaignConfig::validate() const {
  require_file(starter_path, "starter");
  require_file(annotation_path, "annotation");
  require(!output_dir.empty(), "campaign config: missing output_dir");
  switch (scorer.kind) {
    case ScorerSpec::Kind::profile_file:
    case ScorerSpec::Kind::profile_corpus:
    case ScorerSpec::Kind::logits_file:
      require_file(scorer.path, "scorer");
      break;
    case ScorerSpec::Kind::external:
      require(!scorer.command.empty(), "campaign config: external scorer needs a command");
      require(scorer.timeout_ms > 0, "campaign config: scorer timeout must be positive");
      break;
  }
  for (const auto& oracle : oracles) {
    require(!oracle.name.empty(), "campaign config: every oracle needs a name");
    require(oracle.tau > 0, "campaign config: oracle '", oracle.name,
            "' temperature must be positive");
    if (oracle.kind == OracleSpec::Kind::structure) {
      require_file(oracle.starter_coords, "oracle starter_coords");
      require_file(oracle.mutant_coords_dir, "oracle mutant_coords_dir");
    } else {
      require_file(oracle.path, "oracle");
    }
  }
  if (!ninemer_db_path.empty()) require_file(ninemer_db_path, "ninemer_db");
  if (!percentile_ref_path.empty()) require_file(percentile_ref_path, "percentile_reference");
  make_mask_policy();
  require(rounds >= 1, "campaign config: rounds must be at least 1");
  require(workers >= 1, "campaign config: workers must be at least 1");
  if (selection.mode == SelectionSpec::Mode::ranked) {
    require(!selection.oracle.empty(), "campaign config: ranked selection needs an oracle");
    bool known = false;
    for (const auto& oracle : oracles) known = known || oracle.name == selection.oracle;
    require(known, "campaign config: ranked selection oracle '", selection.oracle,
            "' is not a configured oracle");
  }
  if (selection.mode != SelectionSpec::Mode::none) {
    require(selection.k >= 1, "campaign config: selection k must be at least 1");
  }
  require(!require_improved_oracle || !oracles.empty(),
          "campaign config: require_improved_oracle needs at least one oracle");
  SamplingConfig probe;
  probe.method = method;
  probe.tau_mlm = tau_mlm;
  probe.n_samples = n_samples;
  probe.p_mask = p_mask;
  probe.max_argmax_rounds = max_argmax_rounds;
  probe.validate();
}

namespace {

std::string resolve(const fs::path& base, const std::string& path) {
  if (path.empty()) return path;
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (base / p).string();
}

}  // namespace

CampaignConfig load_campaign_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open campaign config: ", path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("campaign config ", path, ": invalid JSON: ", e.what());
  }
  const fs::path base = fs::path(path).parent_path();

  CampaignConfig config;
  config.starter_path = resolve(base, j.value("starter", ""));
  config.annotation_path = resolve(base, j.value("annotation", ""));
  config.output_dir = resolve(base, j.value("output_dir", ""));

  require(j.contains("scorer"), "campaign config ", path, ": missing scorer");
  const auto& scorer = j.at("scorer");
  const std::string scorer_type = scorer.value("type", "");
  if (scorer_type == "profile") {
    if (scorer.contains("model")) {
      config.scorer.kind = ScorerSpec::Kind::profile_file;
      config.scorer.path = resolve(base, scorer.at("model").get<std::string>());
    } else {
      config.scorer.kind = ScorerSpec::Kind::profile_corpus;
      require(scorer.contains("corpus"), "campaign config ", path,
              ": profile scorer needs a model or corpus path");
      config.scorer.path = resolve(base, scorer.at("corpus").get<std::string>());
      config.scorer.alpha = scorer.value("alpha", 1.0);
      config.scorer.lambda = scorer.value("lambda", 0.7);
    }
  } else if (scorer_type == "external") {
    config.scorer.kind = ScorerSpec::Kind::external;
    config.scorer.command = scorer.value("command", "");
    config.scorer.timeout_ms = scorer.value("timeout_ms", std::int64_t{30000});
  } else if (scorer_type == "logits_file") {
    config.scorer.kind = ScorerSpec::Kind::logits_file;
    config.scorer.path = resolve(base, scorer.value("path", ""));
  } else {
    fail("campaign config ", path, ": unknown scorer type '", scorer_type, "'");
  }

  for (const auto& oracle_json : j.value("oracles", nlohmann::json::array())) {
    OracleSpec spec;
    spec.name = oracle_json.value("name", "");
    const std::string type = oracle_json.value("type", "");
    if (type == "cached_matrix") {
      spec.kind = OracleSpec::Kind::cached_matrix;
      spec.path = resolve(base, oracle_json.value("path", ""));
    } else if (type == "additive_weights") {
      spec.kind = OracleSpec::Kind::additive_weights;
      spec.path = resolve(base, oracle_json.value("path", ""));
      spec.cached = oracle_json.value("cached", true);
    } else if (type == "structure") {
      spec.kind = OracleSpec::Kind::structure;
      spec.starter_coords = resolve(base, oracle_json.value("starter_coords", ""));
      spec.mutant_coords_dir = resolve(base, oracle_json.value("mutant_coords_dir", ""));
    } else {
      fail("campaign config ", path, ": unknown oracle type '", type, "'");
    }
    spec.tau = oracle_json.value("tau", 0.4);
    config.oracles.push_back(std::move(spec));
  }

  const auto sampling = j.value("sampling", nlohmann::json::object());
  config.method = sampling_method_from_string(sampling.value("method", "unmasked"));
  config.tau_mlm = sampling.value("tau_mlm", 1.0);
  config.n_samples = sampling.value("n_samples", std::size_t{100});
  config.base_seed = sampling.value("seed", std::uint64_t{0});
  config.dedupe = sampling.value("dedupe", true);
  config.p_mask = sampling.value("p_mask", 0.5);
  config.max_argmax_rounds = sampling.value("max_argmax_rounds", std::size_t{10});
  if (sampling.contains("mask_policy")) {
    const auto& mp = sampling.at("mask_policy");
    config.mask_policy = mp.value("type", "framework_all");
    config.max_total = mp.value("max_total", std::size_t{6});
    config.max_cdr = mp.value("max_cdr", std::size_t{2});
  }

  const auto filters = j.value("filters", nlohmann::json::object());
  config.filters_enabled = filters.value("enabled", true);
  config.filter_config.ddd_isomerization = filters.value("ddd", true);
  config.filter_config.n_glycosylation = filters.value("nglyc", true);
  config.filter_config.non_canonical_cysteine = filters.value("cysteine", true);

  config.require_improved_humanness = j.value("require_improved_humanness", false);
  config.require_improved_oracle = j.value("require_improved_oracle", false);

  const auto selection = j.value("selection", nlohmann::json::object());
  const std::string mode = selection.value("mode", "none");
  if (mode == "ranked") {
    config.selection.mode = SelectionSpec::Mode::ranked;
  } else if (mode == "unranked") {
    config.selection.mode = SelectionSpec::Mode::unranked;
  } else if (mode == "none") {
    config.selection.mode = SelectionSpec::Mode::none;
  } else {
    fail("campaign config ", path, ": unknown selection mode '", mode, "'");
  }
  config.selection.k = selection.value("k", std::size_t{10});
  config.selection.oracle = selection.value("oracle", "");

  config.ninemer_db_path = resolve(base, j.value("ninemer_db", ""));
  config.percentile_ref_path = resolve(base, j.value("percentile_reference", ""));
  config.rounds = j.value("rounds", std::size_t{1});
  config.workers = j.value("workers", std::size_t{1});
  config.write_trajectories = j.value("write_trajectories", false);
  return config;
}

std::string campaign_config_to_json(const CampaignConfig& config) {
  nlohmann::json j;
  j["starter"] = config.starter_path;
  j["annotation"] = config.annotation_path;
  j["output_dir"] = config.output_dir;
  nlohmann::json scorer;
  switch (config.scorer.kind) {
    case ScorerSpec::Kind::profile_file:
      scorer = {{"type", "profile"}, {"model", config.scorer.path}};
      break;
    case ScorerSpec::Kind::profile_corpus:
      scorer = {{"type", "profile"},
                {"corpus", config.scorer.path},
                {"alpha", config.scorer.alpha},
                {"lambda", config.scorer.lambda}};
      break;
    case ScorerSpec::Kind::external:
      scorer = {{"type", "external"},
                {"command", config.scorer.command},
                {"timeout_ms", config.scorer.timeout_ms}};
      break;
    case ScorerSpec::Kind::logits_file:
      scorer = {{"type", "logits_file"}, {"path", config.scorer.path}};
      break;
  }
  j["scorer"] = std::move(scorer);
  nlohmann::json oracles = nlohmann::json::array();
  for (const auto& spec : config.oracles) {
    nlohmann::json o;
    o["name"] = spec.name;
    o["tau"] = spec.tau;
    switch (spec.kind) {
      case OracleSpec::Kind::cached_matrix:
        o["type"] = "cached_matrix";
        o["path"] = spec.path;
        break;
      case OracleSpec::Kind::additive_weights:
        o["type"] = "additive_weights";
        o["path"] = spec.path;
        o["cached"] = spec.cached;
        break;
      case OracleSpec::Kind::structure:
        o["type"] = "structure";
        o["starter_coords"] = spec.starter_coords;
        o["mutant_coords_dir"] = spec.mutant_coords_dir;
        break;
    }
    oracles.push_back(std::move(o));
  }
  j["oracles"] = std::move(oracles);
  j["sampling"] = {
      {"method", to_string(config.method)},
      {"tau_mlm", config.tau_mlm},
      {"n_samples", config.n_samples},
      {"seed", config.base_seed},
      {"dedupe", config.dedupe},
      {"p_mask", config.p_mask},
      {"max_argmax_rounds", config.max_argmax_rounds},
      {"mask_policy",
       {{"type", config.mask_policy},
        {"max_total", config.max_total},
        {"max_cdr", config.max_cdr}}},
  };
  j["filters"] = {{"enabled", config.filters_enabled},
                  {"ddd", config.filter_config.ddd_isomerization},
                  {"nglyc", config.filter_config.n_glycosylation},
                  {"cysteine", config.filter_config.non_canonical_cysteine},
                  {"rules_version", kFilterRulesVersion}};
  j["require_improved_humanness"] = config.require_improved_humanness;
  j["require_improved_oracle"] = config.require_improved_oracle;
  nlohmann::json selection;
  switch (config.selection.mode) {
    case SelectionSpec::Mode::none: selection["mode"] = "none"; break;
    case SelectionSpec::Mode::ranked: selection["mode"] = "ranked"; break;
    case SelectionSpec::Mode::unranked: selection["mode"] = "unranked"; break;
  }
  selection["k"] = config.selection.k;
  selection["oracle"] = config.selection.oracle;
  j["selection"] = std::move(selection);
  j["ninemer_db"] = config.ninemer_db_path;
  j["percentile_reference"] = config.percentile_ref_path;
  j["rounds"] = config.rounds;
  j["workers"] = config.workers;
  j["write_trajectories"] = config.write_trajectories;
  return j.dump(2) + "\n";
}

std::vector<std::string> candidates_csv_columns(const CampaignConfig& config) {
  std::vector<std::string> columns = {"id", "sequence", "num_mutations", "mutations",
                                      "mlm_loglik"};
  if (!config.ninemer_db_path.empty()) {
    columns.push_back("ninemer_score");
    if (!config.percentile_ref_path.empty()) columns.push_back("ninemer_percentile");
  }
  for (const auto& oracle : config.oracles) columns.push_back(oracle.name);
  columns.push_back("passed_filters");
  columns.push_back("filter_failures");
  columns.push_back("rank");
  return columns;
}

void write_candidates_csv(const std::string& path, const std::vector<Candidate>& candidates,
                          const std::vector<std::string>& columns) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) out << ',';
    out << columns[i];
  }
  out << '\n';
  for (const auto& c : candidates) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i > 0) out << ',';
      const std::string& col = columns[i];
      if (col == "id") {
        out << c.sequence.id;
      } else if (col == "sequence") {
        out << c.sequence.to_string();
      } else if (col == "num_mutations") {
        out << c.mutations.size();
      } else if (col == "mutations") {
        out << mutations_report_string(c.mutations);
      } else if (col == "passed_filters") {
        out << (c.passed_filters ? "true" : "false");
      } else if (col == "filter_failures") {
        out << c.filter_failures;
      } else if (col == "rank") {
        if (c.rank) out << *c.rank;
      } else {
        const auto it = c.scores.find(col);
        require(it != c.scores.end(), "write_candidates_csv: candidate '", c.sequence.id,
                "' is missing score column '", col, "'");
        out << fmt_g(it->second);
      }
    }
    out << '\n';
  }
  require(out.good(), "error writing csv: ", path);
}

namespace {

/// One configured oracle, realized for a specific round starter.
struct OracleRuntime {
  OracleSpec spec;
  std::shared_ptr<const AttributeOracle> live;       // additive oracles only
  std::shared_ptr<const OracleScoreMatrix> matrix;   // cached route

  double candidate_score(const AntibodySequence& seq, const AntibodySequence& starter) const {
    if (live) return oracle_value(*live, seq);
    return matrix->approx_value(seq, starter);
  }
};

OracleScoreMatrix build_structure_matrix(const OracleSpec& spec,
                                         const AntibodySequence& starter) {
  const BackboneCoordinates starter_coords = load_coordinates(spec.starter_coords);
  require(starter_coords.length() == starter.length(), "structure oracle '", spec.name,
          "': starter coordinates have ", starter_coords.length(), " rows, sequence has ",
          starter.length());
  OracleScoreMatrix matrix;
  matrix.starter_hash = sequence_hash(starter);
  matrix.values.resize(starter.length());
  const fs::path dir(spec.mutant_coords_dir);
  for (std::size_t l = 0; l < starter.length(); ++l) {
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      const std::string stem =
          "pos" + std::to_string(l + 1) + "_" + std::string(1, kAlphabet[i]);
      fs::path file = dir / (stem + ".xyz");
      if (!fs::exists(file)) file = dir / (stem + ".txt");
      if (!fs::exists(file)) {
        require(starter.residues[l] == i, "structure oracle '", spec.name,
                "': missing coordinates file for mutation ", stem);
        matrix.values[l][i] = 0.0;  // the starter itself: zero deviation
        continue;
      }
      matrix.values[l][i] = structure_score(load_coordinates(file.string()), starter_coords);
    }
  }
  return matrix;
}

struct ScorerRuntime {
  std::shared_ptr<const ConditionalSequenceModel> scoring_model;
  ModelProvider provider;
};

ScorerRuntime build_scorer(const ScorerSpec& spec) {
  ScorerRuntime runtime;
  switch (spec.kind) {
    case ScorerSpec::Kind::profile_file: {
      auto model = std::make_shared<ContextProfileModel>(ContextProfileModel::load(spec.path));
      runtime.scoring_model = model;
      runtime.provider = shared_model_provider(model);
      break;
    }
    case ScorerSpec::Kind::profile_corpus: {
      const auto corpus = parse_fasta(spec.path);
      auto model = std::make_shared<ContextProfileModel>(
          train_context_profile(corpus, spec.alpha, spec.lambda));
      runtime.scoring_model = model;
      runtime.provider = shared_model_provider(model);
      break;
    }
    case ScorerSpec::Kind::logits_file: {
      auto model = load_logits_file_model(spec.path);
      runtime.scoring_model = model;
      runtime.provider = shared_model_provider(model);
      break;
    }
    case ScorerSpec::Kind::external: {
      ExternalScorerOptions options{spec.command,
                                    std::chrono::milliseconds(spec.timeout_ms)};
      runtime.scoring_model = std::make_shared<ExternalScorerModel>(options);
      runtime.provider = [options](std::size_t) {
        return std::make_shared<ExternalScorerModel>(options);
      };
      break;
    }
  }
  return runtime;
}

nlohmann::json quantiles_json(std::vector<double> values) {
  return {{"min", testkit::quantile(values, 0.0)},
          {"q25", testkit::quantile(values, 0.25)},
          {"median", testkit::quantile(values, 0.5)},
          {"q75", testkit::quantile(values, 0.75)},
          {"max", testkit::quantile(values, 1.0)}};
}

void write_trajectories_jsonl(const std::string& path,
                              const std::vector<Candidate>& candidates,
                              const std::vector<Trajectory>& trajectories) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: ", path);
  for (std::size_t i = 0; i < candidates.size() && i < trajectories.size(); ++i) {
    nlohmann::json j;
    j["id"] = candidates[i].sequence.id;
    j["seed"] = trajectories[i].seed;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : trajectories[i].steps) {
      steps.push_back({{"step", step.step},
                       {"position", step.position},
                       {"model_logits", step.model_logits},
                       {"combined_logits", step.combined_logits},
                       {"sampled", std::string(1, residue_to_char(step.sampled))}});
    }
    j["steps"] = std::move(steps);
    out << j.dump() << '\n';
  }
  require(out.good(), "error writing trajectories: ", path);
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config) {
  config.validate();
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);

  std::string stage = "setup";
  try {
    CampaignResult result;

    {
      std::ofstream cfg(out_dir / "config.json");
      require(cfg.good(), "cannot write resolved config");
      cfg << campaign_config_to_json(config);
    }

    stage = "inputs";
    const auto starters = parse_fasta(config.starter_path);
    AntibodySequence round_starter = starters.front();
    require(!round_starter.contains_mask(), "starter '", round_starter.id,
            "' contains MASK");
    std::vector<std::string> annotation_warnings;
    const RegionAnnotation annotation =
        parse_annotation(config.annotation_path, &annotation_warnings);
    annotation.validate_for_length(round_starter.length());
    for (auto& w : annotation_warnings) result.warnings.push_back(std::move(w));

    stage = "scorer";
    ScorerRuntime scorer = build_scorer(config.scorer);

    stage = "oracles";
    std::vector<OracleRuntime> oracle_runtimes;
    for (const auto& spec : config.oracles) {
      OracleRuntime runtime;
      runtime.spec = spec;
      switch (spec.kind) {
        case OracleSpec::Kind::cached_matrix: {
          auto matrix = std::make_shared<OracleScoreMatrix>(load_score_matrix_tsv(spec.path));
          require(matrix->length() == round_starter.length(), "oracle '", spec.name,
                  "': matrix has ", matrix->length(), " rows, starter has ",
                  round_starter.length());
          runtime.matrix = std::move(matrix);
          break;
        }
        case OracleSpec::Kind::additive_weights: {
          auto weights = load_matrix_tsv(spec.path).rows;
          require(weights.size() == round_starter.length(), "oracle '", spec.name,
                  "': weight table has ", weights.size(), " rows, starter has ",
                  round_starter.length());
          runtime.live = std::make_shared<testkit::AdditiveOracle>(std::move(weights));
          break;
        }
        case OracleSpec::Kind::structure: {
          runtime.matrix =
              std::make_shared<OracleScoreMatrix>(build_structure_matrix(spec, round_starter));
          break;
        }
      }
      oracle_runtimes.push_back(std::move(runtime));
    }

    const std::string humanness_metric =
        config.ninemer_db_path.empty() ? "mlm_loglik" : "ninemer_score";
    NinemerDatabase ninemer_db;
    if (!config.ninemer_db_path.empty()) ninemer_db = load_ninemer_db(config.ninemer_db_path);
    PercentileReference percentile_ref;
    if (!config.percentile_ref_path.empty()) {
      percentile_ref = load_percentile_reference(config.percentile_ref_path);
    }

    const std::vector<std::string> columns = candidates_csv_columns(config);

    for (std::size_t round = 1; round <= config.rounds; ++round) {
      stage = "round " + std::to_string(round);
      RoundResult round_result;
      round_result.round = round;
      round_result.starter = round_starter;
      round_result.humanness_metric = humanness_metric;

      // Per-round guidance: live cached-mode oracles are re-cached against
      // this round's starter; file-loaded and structure matrices are reused
      // with a staleness warning when the starter moved.
      std::vector<GuidanceTerm> guidance;
      for (auto& runtime : oracle_runtimes) {
        std::shared_ptr<const PointScoreSource> source;
        if (runtime.live && runtime.spec.cached) {
          auto cached = std::make_shared<OracleScoreMatrix>(
              cache_oracle(*runtime.live, round_starter));
          runtime.matrix = cached;
          source = std::make_shared<CachedMatrixSource>(*cached);
        } else if (runtime.live) {
          source = std::make_shared<FreshOracleSource>(runtime.live, round_starter);
        } else {
          if (!runtime.matrix->matches(round_starter)) {
            round_result.warnings.push_back(detail::concat(
                "oracle '", runtime.spec.name,
                "': cached matrix starter hash does not match this round's starter; the "
                "cached approximation is stale"));
          }
          source = std::make_shared<CachedMatrixSource>(*runtime.matrix);
        }
        guidance.push_back({runtime.spec.name, source, runtime.spec.tau});
      }

      stage = "round " + std::to_string(round) + " sampling";
      SamplingConfig sampling;
      sampling.method = config.method;
      sampling.tau_mlm = config.tau_mlm;
      sampling.mask_policy = config.make_mask_policy();
      sampling.n_samples = config.n_samples;
      sampling.base_seed = round == 1 ? config.base_seed : mix64(config.base_seed, round);
      sampling.dedupe = config.dedupe;
      sampling.p_mask = config.p_mask;
      sampling.max_argmax_rounds = config.max_argmax_rounds;

      BatchOptions batch_options;
      batch_options.workers = config.workers;
      batch_options.record_trajectories = config.write_trajectories;
      BatchResult batch = generate_batch(round_starter, annotation, scorer.provider,
                                         sampling, guidance, batch_options);
      round_result.trajectories_run = batch.trajectories_run;
      round_result.shortfall = batch.shortfall;
      for (auto& w : batch.warnings) round_result.warnings.push_back(std::move(w));

      stage = "round " + std::to_string(round) + " scoring";
      auto score_sequence = [&](const AntibodySequence& seq) {
        std::map<std::string, double> scores;
        scores["mlm_loglik"] = sequence_log_likelihood(*scorer.scoring_model, seq);
        if (!config.ninemer_db_path.empty()) {
          scores["ninemer_score"] = ninemer_score(seq, ninemer_db);
          if (!config.percentile_ref_path.empty()) {
            scores["ninemer_percentile"] = percentile(scores["ninemer_score"], percentile_ref);
          }
        }
        for (const auto& runtime : oracle_runtimes) {
          scores[runtime.spec.name] = runtime.candidate_score(seq, round_starter);
        }
        return scores;
      };
      round_result.starter_scores = score_sequence(round_starter);
      for (auto& candidate : batch.candidates) {
        candidate.scores = score_sequence(candidate.sequence);
      }

      stage = "round " + std::to_string(round) + " filtering";
      if (config.filters_enabled) {
        for (auto& candidate : batch.candidates) {
          const FilterReport report =
              filter_liabilities(candidate.sequence, annotation, config.filter_config);
          candidate.passed_filters = report.passed();
          candidate.filter_failures = report.failures_string();
        }
      }

      std::vector<Candidate> table;
      const std::string improvement_oracle =
          config.selection.mode == SelectionSpec::Mode::ranked &&
                  !config.selection.oracle.empty()
              ? config.selection.oracle
              : (config.oracles.empty() ? "" : config.oracles.front().name);
      for (auto& candidate : batch.candidates) {
        if (config.require_improved_humanness &&
            candidate.scores.at(humanness_metric) <=
                round_result.starter_scores.at(humanness_metric)) {
          continue;
        }
        if (config.require_improved_oracle &&
            candidate.scores.at(improvement_oracle) <=
                round_result.starter_scores.at(improvement_oracle)) {
          continue;
        }
        table.push_back(std::move(candidate));
      }
      if ((config.require_improved_humanness || config.require_improved_oracle) &&
          table.size() < config.n_samples) {
        round_result.warnings.push_back(detail::concat(
            "round ", round, ": only ", table.size(), " of ", config.n_samples,
            " candidates satisfy the improvement constraints"));
      }

      stage = "round " + std::to_string(round) + " selection";
      std::size_t pass_count = 0;
      for (const auto& candidate : table) pass_count += candidate.passed_filters ? 1 : 0;
      if (config.selection.mode != SelectionSpec::Mode::none && pass_count > 0) {
        std::size_t k = config.selection.k;
        if (k > pass_count) {
          round_result.warnings.push_back(detail::concat(
              "round ", round, ": selection k reduced from ", k, " to the ", pass_count,
              " filter-passing candidates"));
          k = pass_count;
        }
        SelectionMode mode;
        if (config.selection.mode == SelectionSpec::Mode::ranked) {
          mode = RankedSelection{k, config.selection.oracle};
        } else {
          mode = UnrankedSelection{k};
        }
        Rng selection_rng(mix64(sampling.base_seed, 0x5e1ec7));
        round_result.selected = select(table, mode, selection_rng);
        for (const auto& chosen : round_result.selected) {
          for (auto& candidate : table) {
            if (candidate.sequence.same_residues(chosen.sequence)) {
              candidate.rank = chosen.rank;
              break;
            }
          }
        }
      } else if (config.selection.mode != SelectionSpec::Mode::none) {
        round_result.warnings.push_back(detail::concat(
            "round ", round, ": no filter-passing candidates, selection skipped"));
      }

      if (!table.empty()) {
        round_result.unique_improved = count_unique_improved(
            table, round_result.starter_scores.at(humanness_metric), humanness_metric);
      }
      round_result.candidates = std::move(table);

      stage = "round " + std::to_string(round) + " output";
      const fs::path round_dir =
          config.rounds > 1 ? out_dir / ("round_" + std::to_string(round)) : out_dir;
      fs::create_directories(round_dir);
      write_candidates_csv((round_dir / "candidates.csv").string(), round_result.candidates,
                           columns);
      if (config.write_trajectories) {
        write_trajectories_jsonl((round_dir / "trajectories.jsonl").string(),
                                 batch.candidates, batch.trajectories);
      }

      nlohmann::json summary;
      summary["round"] = round;
      summary["starter_id"] = round_starter.id;
      summary["starter_sequence"] = round_starter.to_string();
      summary["starter_scores"] = round_result.starter_scores;
      summary["n_trajectories"] = round_result.trajectories_run;
      summary["n_candidates"] = round_result.candidates.size();
      summary["n_pass_filters"] = pass_count;
      summary["n_selected"] = round_result.selected.size();
      summary["unique_count"] = round_result.unique_improved.unique;
      summary["improved_count"] = round_result.unique_improved.improved;
      summary["humanness_metric"] = humanness_metric;
      summary["shortfall"] = round_result.shortfall;
      summary["filter_rules_version"] = kFilterRulesVersion;
      summary["warnings"] = round_result.warnings;
      nlohmann::json quantiles;
      for (const auto& column : columns) {
        if (round_result.candidates.empty()) break;
        if (!round_result.candidates.front().scores.count(column)) continue;
        std::vector<double> values;
        values.reserve(round_result.candidates.size());
        for (const auto& candidate : round_result.candidates) {
          values.push_back(candidate.scores.at(column));
        }
        quantiles[column] = quantiles_json(std::move(values));
      }
      summary["score_quantiles"] = std::move(quantiles);
      {
        std::ofstream out(round_dir / "summary.json");
        require(out.good(), "cannot write summary.json");
        out << summary.dump(2) << '\n';
      }

      // Seed the next round with the top-ranked filter-passing candidate.
      if (round < config.rounds) {
        const Candidate* next = nullptr;
        if (!round_result.selected.empty() &&
            config.selection.mode == SelectionSpec::Mode::ranked) {
          next = &round_result.selected.front();
        } else {
          const std::string metric =
              improvement_oracle.empty() ? humanness_metric : improvement_oracle;
          for (const auto& candidate : round_result.candidates) {
            if (!candidate.passed_filters) continue;
            if (!next || candidate.scores.at(metric) > next->scores.at(metric) ||
                (candidate.scores.at(metric) == next->scores.at(metric) &&
                 candidate.sequence.to_string() < next->sequence.to_string())) {
              next = &candidate;
            }
          }
        }
        if (!next) {
          result.warnings.push_back(detail::concat(
              "round ", round, ": no filter-passing candidate to seed round ", round + 1,
              "; stopping early"));
          result.rounds.push_back(std::move(round_result));
          break;
        }
        AntibodySequence seed_seq = next->sequence;
        seed_seq.id = round_starter.id + "|r" + std::to_string(round) + ":" + seed_seq.id;
        round_starter = std::move(seed_seq);
      }
      result.rounds.push_back(std::move(round_result));
    }
    return result;
  } catch (const std::exception& e) {
    std::ofstream manifest(out_dir / "MANIFEST");
    manifest << "status: incomplete\nstage: " << stage << "\nerror: " << e.what() << '\n';
    fail("campaign aborted at stage '", stage, "': ", e.what());
  }
}

}  // namespace humanizer
