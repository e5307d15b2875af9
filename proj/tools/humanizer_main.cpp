// Command-line front end: train-scorer, build-ninemer-db, humanize, selfcheck,
// and a make-demo helper that writes a self-contained example workspace.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "humanizer/context_profile.hpp"
#include "humanizer/error.hpp"
#include "humanizer/fasta.hpp"
#include "humanizer/matrix_io.hpp"
#include "humanizer/ninemer.hpp"
#include "humanizer/pipeline.hpp"
#include "humanizer/structure.hpp"
#include "humanizer/testkit/brute_force.hpp"
#include "humanizer/testkit/oracles.hpp"
#include "humanizer/testkit/planted_corpus.hpp"
#include "humanizer/testkit/stats.hpp"

namespace fs = std::filesystem;
using namespace humanizer;

namespace {

int cmd_train_scorer(const std::string& corpus_path, double alpha, double lambda,
                     const std::string& out_path) {
  const auto corpus = parse_fasta(corpus_path);
  const ContextProfileModel model = train_context_profile(corpus, alpha, lambda);
  model.save(out_path);
  std::cout << "trained context profile on " << corpus.size() << " sequences of length "
            << model.length() << " (alpha=" << alpha << ", lambda=" << lambda << ")\n"
            << "wrote " << out_path << "\n";
  return 0;
}

int cmd_build_ninemer_db(const std::string& corpus_path, double threshold,
                         const std::string& out_path) {
  const auto records = parse_fasta(corpus_path);
  const SubjectCorpus subjects = group_by_subject(records);
  const NinemerDatabase db = build_ninemer_db(subjects, threshold);
  save_ninemer_db(out_path, db);
  std::cout << "built 9-mer database: " << db.prevalence.size() << " distinct 9-mers from "
            << db.subject_count << " subjects (threshold=" << threshold << ")\n"
            << "wrote " << out_path << "\n";
  return 0;
}

int cmd_humanize(const CampaignConfig& config) {
  const CampaignResult result = run_campaign(config);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& round : result.rounds) {
    for (const auto& w : round.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "round " << round.round << ": " << round.candidates.size()
              << " candidates (" << round.unique_improved.unique << " unique, "
              << round.unique_improved.improved << " improved on " << round.humanness_metric
              << ")";
    if (!round.selected.empty()) std::cout << ", selected " << round.selected.size();
    std::cout << "\n";
  }
  std::cout << "outputs in " << config.output_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// selfcheck

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

AntibodySequence make_check_sequence(std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  AntibodySequence seq;
  seq.id = "selfcheck";
  for (std::size_t i = 0; i < length; ++i) {
    seq.residues.push_back(static_cast<Residue>(rng.next_below(kAlphabetSize)));
  }
  return seq;
}

std::vector<AntibodySequence> make_check_corpus(const AntibodySequence& consensus,
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

CheckResult check_scorer(const std::string& model_path) {
  CheckResult check{"scorer", false, ""};
  const AntibodySequence consensus = make_check_sequence(24, 11);
  const auto corpus = make_check_corpus(consensus, 100, 0.15, 12);
  const ContextProfileModel model = train_context_profile(corpus, 1.0, 0.7);
  const LogitsMatrix a = model.score(consensus);
  const LogitsMatrix b = model.score(consensus);
  bool identical = a.length() == b.length();
  for (std::size_t l = 0; identical && l < a.length(); ++l) identical = a[l] == b[l];
  require(identical && a.all_finite(), "profile scoring is not deterministic");
  if (!model_path.empty()) {
    const ContextProfileModel loaded = ContextProfileModel::load(model_path);
    const AntibodySequence probe = make_check_sequence(loaded.length(), 13);
    require(loaded.score(probe).all_finite(), "loaded model produced non-finite logits");
    check.detail = "trained profile deterministic; model file loads and scores";
  } else {
    check.detail = "trained profile deterministic and finite";
  }
  check.passed = true;
  return check;
}

CheckResult check_poe() {
  CheckResult check{"poe", false, ""};
  LogitsRow z{};
  LogitsRow spike{};
  spike[4] = std::log(4.0);
  const std::vector<LogitsRow> experts{spike};
  const std::vector<double> temps{1.0};
  const LogitsRow p = softmax_temp(poe_row(z, 1.0, experts, temps), 1.0);
  const double expected = 4.0 / 23.0;
  require(std::abs(p[4] - expected) < 1e-9, "expert spike probability off: ", p[4]);
  check.detail = "single-expert spike case within 1e-9";
  check.passed = true;
  return check;
}

CheckResult check_sampler_tv() {
  CheckResult check{"sampler_tv", false, ""};
  const AntibodySequence consensus = make_check_sequence(16, 21);
  const auto corpus = make_check_corpus(consensus, 200, 0.15, 22);
  const ContextProfileModel model = train_context_profile(corpus, 1.0, 0.7);
  const MutableMask mask{{6, 7}};
  double worst = 0;
  for (const auto method :
       {SamplingMethod::unmasked, SamplingMethod::gibbs, SamplingMethod::ard}) {
    SamplingConfig config;
    config.method = method;
    config.tau_mlm = 1.0;
    const auto exact = testkit::brute_force_joint(consensus, mask, model, config);
    const auto empirical =
        testkit::empirical_joint(consensus, mask, model, config, {}, 50000, 99);
    worst = std::max(worst, testkit::tv_distance(exact, empirical));
  }
  require(worst < 0.04, "empirical-vs-exact TV too large: ", worst);
  check.detail = detail::concat("worst TV over 3 methods at 50k samples: ", worst);
  check.passed = true;
  return check;
}

CheckResult check_enrichment() {
  CheckResult check{"enrichment", false, ""};
  const AntibodySequence starter = make_check_sequence(30, 31);
  const RegionAnnotation annotation = make_annotation({{10, 14}}, {}, ChainType::vhh);
  auto oracle = std::make_shared<testkit::AdditiveOracle>(
      testkit::AdditiveOracle::random(30, 0.5, 32));

  SamplingConfig unguided;
  unguided.method = SamplingMethod::unmasked;
  unguided.tau_mlm = 0.6;
  unguided.mask_policy = RandomBounded{6, 2};
  unguided.n_samples = 300;
  unguided.base_seed = 33;
  const AntibodySequence consensus = make_check_sequence(30, 34);
  const auto corpus = make_check_corpus(consensus, 150, 0.2, 35);
  const ContextProfileModel model = train_context_profile(corpus, 1.0, 0.7);
  const auto unguided_batch = generate_batch(starter, annotation, model, unguided);

  SamplingConfig guided = unguided;
  guided.tau_mlm = 1.2;
  guided.base_seed = 36;
  const auto matrix = cache_oracle(*oracle, starter);
  const std::vector<GuidanceTerm> guidance{
      {"affinity", std::make_shared<CachedMatrixSource>(matrix), 0.4}};
  const auto guided_batch = generate_batch(starter, annotation, model, guided, guidance);

  std::vector<double> unguided_values, guided_values;
  for (const auto& c : unguided_batch.candidates) unguided_values.push_back(oracle->value(c.sequence));
  for (const auto& c : guided_batch.candidates) guided_values.push_back(oracle->value(c.sequence));
  const double p = testkit::mann_whitney_greater_p(guided_values, unguided_values);
  require(testkit::mean(guided_values) > testkit::mean(unguided_values),
          "guided mean not higher");
  require(p < 0.01, "Mann-Whitney p too large: ", p);
  check.detail = detail::concat("guided mean ", testkit::mean(guided_values), " vs unguided ",
                                testkit::mean(unguided_values), ", p = ", p);
  check.passed = true;
  return check;
}

CheckResult check_filters() {
  CheckResult check{"filters", false, ""};
  const auto planted = testkit::make_planted_corpus(41, 60, 40, 0.7);
  std::size_t flagged = 0;
  std::size_t expected = planted.motifs.size();
  for (std::size_t s = 0; s < planted.subjects.size(); ++s) {
    for (const auto& seq : planted.subjects[s].second) {
      const FilterReport report = filter_liabilities(seq, planted.annotation);
      for (const auto& result : report.results) flagged += result.positions.size();
    }
  }
  require(flagged == expected, "flagged ", flagged, " motifs, planted ", expected);
  require(expected > 0, "planted corpus produced no motifs");
  check.detail = detail::concat(expected, " planted motifs, all recovered exactly");
  check.passed = true;
  return check;
}

CheckResult check_structure() {
  CheckResult check{"structure", false, ""};
  BackboneCoordinates starter;
  Rng rng(51);
  for (std::size_t i = 0; i < 10; ++i) {
    starter.coords.push_back(
        {10 * rng.next_double(), 10 * rng.next_double(), 10 * rng.next_double()});
  }
  BackboneCoordinates displaced = starter;
  displaced.coords[3][0] += 3.0;
  const double score = structure_score_prealigned(displaced, starter);
  require(std::abs(score - (-1.0 / 300.0)) < 1e-12, "hand case off: ", score);
  require(structure_score_prealigned(starter, starter) == 0.0, "identity case not zero");
  check.detail = "single 3A displacement scores -1/300; identity scores 0";
  check.passed = true;
  return check;
}

int cmd_selfcheck(bool as_json, const std::string& model_path) {
  std::vector<CheckResult> checks;
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> runners = {
      {"scorer", [&] { return check_scorer(model_path); }},
      {"poe", [] { return check_poe(); }},
      {"sampler_tv", [] { return check_sampler_tv(); }},
      {"enrichment", [] { return check_enrichment(); }},
      {"filters", [] { return check_filters(); }},
      {"structure", [] { return check_structure(); }},
  };
  for (const auto& [name, runner] : runners) {
    CheckResult result;
    try {
      result = runner();
    } catch (const std::exception& e) {
      result.name = name;
      result.passed = false;
      result.detail = e.what();
    }
    checks.push_back(std::move(result));
  }
  bool all_passed = true;
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : checks) {
      j.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
      all_passed = all_passed && c.passed;
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& c : checks) {
      std::cout << (c.passed ? "PASS" : "FAIL") << " " << c.name << ": " << c.detail << "\n";
      all_passed = all_passed && c.passed;
    }
  }
  return all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// make-demo

void scrub_liabilities(std::string& s) {
  for (int pass = 0; pass < 16; ++pass) {
    bool dirty = false;
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
      if (s[i] == 'D' && s[i + 1] == 'D' && s[i + 2] == 'D') {
        s[i + 1] = 'G';
        dirty = true;
      }
      if (s[i] == 'N' && s[i + 1] != 'P' && (s[i + 2] == 'S' || s[i + 2] == 'T')) {
        s[i] = 'Q';
        dirty = true;
      }
    }
    if (!dirty) break;
  }
}

int cmd_make_demo(const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  constexpr std::size_t kLength = 120;
  constexpr std::string_view kNoCys = "ADEFGHIKLMNPQRSTVWY";
  Rng rng(20240);

  std::string consensus;
  for (std::size_t i = 0; i < kLength; ++i) {
    consensus.push_back(kNoCys[rng.next_below(kNoCys.size())]);
  }
  scrub_liabilities(consensus);
  consensus[21] = 'C';
  consensus[95] = 'C';

  const std::vector<Interval> cdrs = {{26, 34}, {50, 59}, {96, 111}};
  auto in_cdr = [&](std::size_t pos) {
    for (const auto& iv : cdrs) {
      if (pos >= iv.start && pos < iv.end) return true;
    }
    return false;
  };

  // Corpus: consensus with light noise, cysteines and liabilities kept clean.
  std::vector<AntibodySequence> corpus;
  for (std::size_t i = 0; i < 200; ++i) {
    std::string text = consensus;
    for (std::size_t pos = 0; pos < kLength; ++pos) {
      if (pos == 21 || pos == 95) continue;
      if (rng.next_double() < 0.08) text[pos] = kNoCys[rng.next_below(kNoCys.size())];
    }
    scrub_liabilities(text);
    corpus.push_back(AntibodySequence::from_string("subject" + std::to_string(i), text));
  }
  write_fasta((dir / "corpus.fasta").string(), corpus);

  // Starter: consensus corrupted at a few framework positions, like a
  // non-human antibody in need of humanization.
  std::string starter_text = consensus;
  std::size_t corrupted = 0;
  while (corrupted < 8) {
    const std::size_t pos = rng.next_below(kLength);
    if (in_cdr(pos) || pos == 21 || pos == 95) continue;
    const char replacement = kNoCys[rng.next_below(kNoCys.size())];
    if (replacement == starter_text[pos]) continue;
    starter_text[pos] = replacement;
    ++corrupted;
  }
  scrub_liabilities(starter_text);
  write_fasta((dir / "starter.fasta").string(),
              {AntibodySequence::from_string("demo_vhh", starter_text)});

  nlohmann::json annotation;
  annotation["cdr_intervals"] = {{26, 34}, {50, 59}, {96, 111}};
  annotation["canonical_cysteines"] = {21, 95};
  annotation["chain_type"] = "vhh";
  {
    std::ofstream out(dir / "annotation.json");
    out << annotation.dump(2) << "\n";
  }

  const auto oracle = testkit::AdditiveOracle::random(kLength, 0.5, 20241);
  save_matrix_tsv((dir / "affinity_weights.tsv").string(), oracle.weights(),
                  {"additive oracle weight table"});

  nlohmann::json config;
  config["starter"] = "starter.fasta";
  config["annotation"] = "annotation.json";
  config["output_dir"] = "out";
  config["scorer"] = {{"type", "profile"}, {"model", "model.json"}};
  config["oracles"] = {{{"name", "affinity"},
                        {"type", "additive_weights"},
                        {"path", "affinity_weights.tsv"},
                        {"tau", 0.4},
                        {"cached", true}}};
  config["sampling"] = {{"method", "unmasked"},
                        {"tau_mlm", 1.2},
                        {"n_samples", 500},
                        {"seed", 17},
                        {"dedupe", true},
                        {"mask_policy",
                         {{"type", "random_bounded"}, {"max_total", 6}, {"max_cdr", 2}}}};
  config["selection"] = {{"mode", "ranked"}, {"k", 10}, {"oracle", "affinity"}};
  config["ninemer_db"] = "ninemer.tsv";
  config["rounds"] = 1;
  {
    std::ofstream out(dir / "config.json");
    out << config.dump(2) << "\n";
  }

  std::cout << "demo workspace in " << out_dir << "\n"
            << "next steps:\n"
            << "  humanizer train-scorer --corpus " << (dir / "corpus.fasta").string()
            << " --out " << (dir / "model.json").string() << "\n"
            << "  humanizer build-ninemer-db --corpus " << (dir / "corpus.fasta").string()
            << " --out " << (dir / "ninemer.tsv").string() << "\n"
            << "  humanizer humanize --config " << (dir / "config.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antibody humanization via guided sampling from conditional sequence models"};
  app.require_subcommand(1);

  // train-scorer
  std::string ts_corpus, ts_out = "model.json";
  double ts_alpha = 1.0, ts_lambda = 0.7;
  auto* train = app.add_subcommand("train-scorer",
                                   "Train the context-profile scorer from a FASTA corpus");
  train->add_option("--corpus", ts_corpus, "equal-length FASTA corpus")->required();
  train->add_option("--alpha", ts_alpha, "pseudocount (> 0)");
  train->add_option("--lambda", ts_lambda, "context interpolation weight in [0, 1]");
  train->add_option("--out", ts_out, "output model file");

  // build-ninemer-db
  std::string nm_corpus, nm_out = "ninemer.tsv";
  double nm_threshold = 0.10;
  auto* ninemer = app.add_subcommand(
      "build-ninemer-db", "Build the 9-mer prevalence database from a FASTA corpus");
  ninemer->add_option("--corpus", nm_corpus, "FASTA corpus; repeated ids form one subject")
      ->required();
  ninemer->add_option("--threshold", nm_threshold, "prevalence threshold in [0, 1]");
  ninemer->add_option("--out", nm_out, "output TSV file");

  // humanize
  std::string hm_config;
  std::optional<std::string> hm_starter, hm_annotation, hm_out, hm_method, hm_mask_policy,
      hm_select, hm_rank_oracle, hm_ninemer_db, hm_percentile_ref;
  std::optional<double> hm_tau, hm_p_mask;
  std::optional<std::size_t> hm_n, hm_rounds, hm_workers, hm_max_total, hm_max_cdr, hm_k,
      hm_argmax_rounds;
  std::optional<std::uint64_t> hm_seed;
  std::optional<bool> hm_dedupe;
  bool hm_improved_humanness = false, hm_improved_both = false, hm_trajectories = false;
  auto* humanize = app.add_subcommand("humanize", "Run a humanization campaign");
  humanize->add_option("--config", hm_config, "campaign config JSON")->required();
  humanize->add_option("--starter", hm_starter, "starter FASTA (overrides config)");
  humanize->add_option("--annotation", hm_annotation, "annotation JSON (overrides config)");
  humanize->add_option("--out", hm_out, "output directory (overrides config)");
  humanize->add_option("--method", hm_method,
                       "unmasked|gibbs|ard|sapiens_argmax|random_mask_argmax|"
                       "iterative_mask_argmax");
  humanize->add_option("--tau-mlm", hm_tau, "model softmax temperature");
  humanize->add_option("--n-samples", hm_n, "candidates per round");
  humanize->add_option("--seed", hm_seed, "base seed");
  humanize->add_option("--rounds", hm_rounds, "optimization rounds");
  humanize->add_option("--workers", hm_workers, "worker threads");
  humanize->add_option("--dedupe", hm_dedupe, "collapse duplicate sequences (true/false)");
  humanize->add_option("--p-mask", hm_p_mask, "random_mask_argmax masking probability");
  humanize->add_option("--max-argmax-rounds", hm_argmax_rounds, "sapiens_argmax round cap");
  humanize->add_option("--mask-policy", hm_mask_policy, "framework_all|random_bounded");
  humanize->add_option("--max-total", hm_max_total, "random_bounded: total position budget");
  humanize->add_option("--max-cdr", hm_max_cdr, "random_bounded: CDR position budget");
  humanize->add_option("--select", hm_select, "ranked|unranked|none");
  humanize->add_option("--select-k", hm_k, "selection size");
  humanize->add_option("--rank-oracle", hm_rank_oracle, "oracle name for ranked selection");
  humanize->add_option("--ninemer-db", hm_ninemer_db, "9-mer database TSV");
  humanize->add_option("--percentile-ref", hm_percentile_ref, "percentile reference file");
  humanize->add_flag("--improved-humanness", hm_improved_humanness,
                     "keep only candidates with strictly improved humanness");
  humanize->add_flag("--improved-both", hm_improved_both,
                     "keep only candidates improved in humanness and oracle score");
  humanize->add_flag("--trajectories", hm_trajectories, "write trajectories.jsonl");

  // selfcheck
  bool sc_json = false;
  std::string sc_model;
  auto* selfcheck = app.add_subcommand("selfcheck", "Run the built-in verification suite");
  selfcheck->add_flag("--json", sc_json, "machine-readable results");
  selfcheck->add_option("--model", sc_model, "also check that this model file loads");

  // make-demo
  std::string demo_out = "demo";
  auto* demo = app.add_subcommand("make-demo", "Write a synthetic demo workspace");
  demo->add_option("--out", demo_out, "demo directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train_scorer(ts_corpus, ts_alpha, ts_lambda, ts_out);
    if (*ninemer) return cmd_build_ninemer_db(nm_corpus, nm_threshold, nm_out);
    if (*humanize) {
      CampaignConfig config = load_campaign_config(hm_config);
      if (hm_starter) config.starter_path = *hm_starter;
      if (hm_annotation) config.annotation_path = *hm_annotation;
      if (hm_out) config.output_dir = *hm_out;
      if (hm_method) config.method = sampling_method_from_string(*hm_method);
      if (hm_tau) config.tau_mlm = *hm_tau;
      if (hm_n) config.n_samples = *hm_n;
      if (hm_seed) config.base_seed = *hm_seed;
      if (hm_rounds) config.rounds = *hm_rounds;
      if (hm_workers) config.workers = *hm_workers;
      if (hm_dedupe) config.dedupe = *hm_dedupe;
      if (hm_p_mask) config.p_mask = *hm_p_mask;
      if (hm_argmax_rounds) config.max_argmax_rounds = *hm_argmax_rounds;
      if (hm_mask_policy) config.mask_policy = *hm_mask_policy;
      if (hm_max_total) config.max_total = *hm_max_total;
      if (hm_max_cdr) config.max_cdr = *hm_max_cdr;
      if (hm_select) {
        if (*hm_select == "ranked") config.selection.mode = SelectionSpec::Mode::ranked;
        else if (*hm_select == "unranked") config.selection.mode = SelectionSpec::Mode::unranked;
        else if (*hm_select == "none") config.selection.mode = SelectionSpec::Mode::none;
        else fail("unknown selection mode '", *hm_select, "'");
      }
      if (hm_k) config.selection.k = *hm_k;
      if (hm_rank_oracle) config.selection.oracle = *hm_rank_oracle;
      if (hm_ninemer_db) config.ninemer_db_path = *hm_ninemer_db;
      if (hm_percentile_ref) config.percentile_ref_path = *hm_percentile_ref;
      if (hm_improved_humanness) config.require_improved_humanness = true;
      if (hm_improved_both) {
        config.require_improved_humanness = true;
        config.require_improved_oracle = true;
      }
      if (hm_trajectories) config.write_trajectories = true;
      if (const char* env_seed = std::getenv("HUMANIZER_SEED")) {
        config.base_seed = std::stoull(env_seed);
      }
      return cmd_humanize(config);
    }
    if (*selfcheck) return cmd_selfcheck(sc_json, sc_model);
    if (*demo) return cmd_make_demo(demo_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
