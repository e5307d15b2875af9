#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "humanizer/context_profile.hpp"
#include "humanizer/error.hpp"
#include "humanizer/fasta.hpp"
#include "humanizer/matrix_io.hpp"
#include "humanizer/ninemer.hpp"
#include "humanizer/pipeline.hpp"
#include "humanizer/rng.hpp"
#include "humanizer/selection.hpp"
#include "humanizer/structure.hpp"
#include "humanizer/testkit/oracles.hpp"

using namespace humanizer;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  AntibodySequence starter;
  CampaignConfig config;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fields_in(line);
    while (std::getline(fields_in, field, ',')) fields.push_back(field);
    if (line.ends_with(',')) fields.push_back("");
    rows.push_back(std::move(fields));
  }
  return rows;
}

/// Builds a complete small campaign workspace: corpus, starter, annotation,
/// additive oracle weights, 9-mer database, percentile reference. Base
/// sequences carry cysteines only at the two annotated canonical positions
/// and are scrubbed of liability motifs, so the filters act only on motifs
/// that sampling itself introduces.
Workspace make_workspace(const std::string& name, std::uint64_t seed) {
  Workspace ws;
  ws.dir = fs::temp_directory_path() / ("humanizer_pipeline_" + name);
  fs::remove_all(ws.dir);
  fs::create_directories(ws.dir);

  constexpr std::size_t kLength = 30;
  constexpr std::string_view kNoCys = "ADEFGHIKLMNPQRSTVWY";
  Rng rng(seed);
  const auto draw = [&] {
    return *residue_from_char(kNoCys[rng.next_below(kNoCys.size())]);
  };
  const auto scrub = [](AntibodySequence& seq) {
    std::string text = seq.to_string();
    for (int pass = 0; pass < 8; ++pass) {
      bool dirty = false;
      for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
        if (text[i] == 'D' && text[i + 1] == 'D' && text[i + 2] == 'D') {
          text[i + 1] = 'G';
          dirty = true;
        }
        if (text[i] == 'N' && text[i + 1] != 'P' && (text[i + 2] == 'S' || text[i + 2] == 'T')) {
          text[i] = 'Q';
          dirty = true;
        }
      }
      if (!dirty) break;
    }
    seq = AntibodySequence::from_string(seq.id, text);
  };

  AntibodySequence consensus;
  consensus.id = "consensus";
  for (std::size_t i = 0; i < kLength; ++i) consensus.residues.push_back(draw());
  consensus.residues[3] = *residue_from_char('C');
  consensus.residues[20] = *residue_from_char('C');
  scrub(consensus);

  std::vector<AntibodySequence> corpus;
  for (int i = 0; i < 120; ++i) {
    AntibodySequence seq = consensus;
    seq.id = "subject" + std::to_string(i);
    for (std::size_t pos = 0; pos < kLength; ++pos) {
      if (pos == 3 || pos == 20) continue;
      if (rng.next_double() < 0.15) seq.residues[pos] = draw();
    }
    corpus.push_back(std::move(seq));
  }
  write_fasta((ws.dir / "corpus.fasta").string(), corpus);

  ws.starter = consensus;
  ws.starter.id = "starter";
  for (int k = 0; k < 5; ++k) {
    const std::size_t pos = rng.next_below(kLength);
    if (pos == 3 || pos == 20) continue;
    ws.starter.residues[pos] = draw();
  }
  scrub(ws.starter);
  write_fasta((ws.dir / "starter.fasta").string(), {ws.starter});

  {
    std::ofstream out(ws.dir / "annotation.json");
    out << R"({"cdr_intervals": [[10, 14]], "canonical_cysteines": [3, 20], "chain_type": "vhh"})";
  }

  const auto oracle = testkit::AdditiveOracle::random(kLength, 0.6, seed + 1);
  save_matrix_tsv((ws.dir / "weights.tsv").string(), oracle.weights());

  const NinemerDatabase db = build_ninemer_db(group_by_subject(corpus), 0.10);
  save_ninemer_db((ws.dir / "ninemer.tsv").string(), db);

  {
    std::ofstream out(ws.dir / "percentile.txt");
    for (double v : {0.1, 0.3, 0.5, 0.7, 0.9}) out << v << "\n";
  }

  CampaignConfig config;
  config.starter_path = (ws.dir / "starter.fasta").string();
  config.annotation_path = (ws.dir / "annotation.json").string();
  config.output_dir = (ws.dir / "out").string();
  config.scorer.kind = ScorerSpec::Kind::profile_corpus;
  config.scorer.path = (ws.dir / "corpus.fasta").string();
  OracleSpec oracle_spec;
  oracle_spec.kind = OracleSpec::Kind::additive_weights;
  oracle_spec.name = "affinity";
  oracle_spec.path = (ws.dir / "weights.tsv").string();
  oracle_spec.tau = 0.4;
  config.oracles.push_back(oracle_spec);
  config.method = SamplingMethod::unmasked;
  config.tau_mlm = 1.2;
  config.mask_policy = "random_bounded";
  config.n_samples = 40;
  config.base_seed = 99;
  config.selection.mode = SelectionSpec::Mode::ranked;
  config.selection.k = 5;
  config.selection.oracle = "affinity";
  config.ninemer_db_path = (ws.dir / "ninemer.tsv").string();
  config.percentile_ref_path = (ws.dir / "percentile.txt").string();
  ws.config = config;
  return ws;
}

}  // namespace

TEST_CASE("single-round campaign produces a consistent candidate table") {
  Workspace ws = make_workspace("basic", 1);
  const CampaignResult result = run_campaign(ws.config);
  REQUIRE(result.rounds.size() == 1);
  const RoundResult& round = result.rounds[0];
  CHECK(round.candidates.size() == 40);
  CHECK(round.selected.size() == 5);

  const auto csv = read_csv(fs::path(ws.config.output_dir) / "candidates.csv");
  REQUIRE(csv.size() == 41);
  const std::vector<std::string> expected_columns = {
      "id",           "sequence",       "num_mutations",      "mutations",
      "mlm_loglik",   "ninemer_score",  "ninemer_percentile", "affinity",
      "passed_filters", "filter_failures", "rank"};
  CHECK(csv[0] == expected_columns);

  // Selected candidates carry ranks 1..k with non-increasing oracle scores.
  std::vector<double> ranked_scores(5, 0.0);
  std::size_t ranked_count = 0;
  for (std::size_t r = 1; r < csv.size(); ++r) {
    REQUIRE(csv[r].size() == expected_columns.size());
    if (!csv[r].back().empty()) {
      const std::size_t rank = std::stoul(csv[r].back());
      ranked_scores[rank - 1] = std::stod(csv[r][7]);
      ++ranked_count;
    }
  }
  CHECK(ranked_count == 5);
  for (std::size_t i = 1; i < ranked_scores.size(); ++i) {
    CHECK(ranked_scores[i - 1] >= ranked_scores[i]);
  }

  // summary.json agrees with counts recomputed from the table.
  const nlohmann::json summary =
      nlohmann::json::parse(read_file(fs::path(ws.config.output_dir) / "summary.json"));
  const auto recomputed = count_unique_improved(
      round.candidates, round.starter_scores.at("ninemer_score"), "ninemer_score");
  CHECK(summary.at("unique_count").get<std::size_t>() == recomputed.unique);
  CHECK(summary.at("improved_count").get<std::size_t>() == recomputed.improved);
  CHECK(summary.at("humanness_metric").get<std::string>() == "ninemer_score");
  CHECK(summary.at("n_candidates").get<std::size_t>() == 40);
  CHECK(fs::exists(fs::path(ws.config.output_dir) / "config.json"));
}

TEST_CASE("campaign outputs are byte-identical across runs and worker counts") {
  Workspace ws = make_workspace("determinism", 2);

  CampaignConfig a = ws.config;
  a.output_dir = (ws.dir / "out_a").string();
  a.workers = 1;
  CampaignConfig b = ws.config;
  b.output_dir = (ws.dir / "out_b").string();
  b.workers = 1;
  CampaignConfig c = ws.config;
  c.output_dir = (ws.dir / "out_c").string();
  c.workers = 4;

  run_campaign(a);
  run_campaign(b);
  run_campaign(c);

  const std::string csv_a = read_file(fs::path(a.output_dir) / "candidates.csv");
  CHECK(csv_a == read_file(fs::path(b.output_dir) / "candidates.csv"));
  CHECK(csv_a == read_file(fs::path(c.output_dir) / "candidates.csv"));
  const std::string summary_a = read_file(fs::path(a.output_dir) / "summary.json");
  CHECK(summary_a == read_file(fs::path(b.output_dir) / "summary.json"));
  CHECK(summary_a == read_file(fs::path(c.output_dir) / "summary.json"));
}

TEST_CASE("a different seed changes the candidate table") {
  Workspace ws = make_workspace("seed", 3);
  CampaignConfig a = ws.config;
  a.output_dir = (ws.dir / "out_a").string();
  CampaignConfig b = ws.config;
  b.output_dir = (ws.dir / "out_b").string();
  b.base_seed = ws.config.base_seed + 1;
  run_campaign(a);
  run_campaign(b);
  CHECK(read_file(fs::path(a.output_dir) / "candidates.csv") !=
        read_file(fs::path(b.output_dir) / "candidates.csv"));
}

TEST_CASE("multi-round campaigns reseed from the top-ranked candidate") {
  Workspace ws = make_workspace("rounds", 4);
  ws.config.rounds = 2;
  ws.config.n_samples = 30;
  const CampaignResult result = run_campaign(ws.config);
  REQUIRE(result.rounds.size() == 2);
  CHECK(fs::exists(fs::path(ws.config.output_dir) / "round_1" / "candidates.csv"));
  CHECK(fs::exists(fs::path(ws.config.output_dir) / "round_2" / "candidates.csv"));
  // Round 2 starts from round 1's rank-1 selection.
  const Candidate& top = result.rounds[0].selected.front();
  CHECK(result.rounds[1].starter.same_residues(top.sequence));
  // The oracle-guided loop should not regress the seed's oracle score.
  CHECK(result.rounds[1].starter_scores.at("affinity") >=
        result.rounds[0].starter_scores.at("affinity"));
}

TEST_CASE("improvement constraints shrink the table and warn on shortfall") {
  Workspace ws = make_workspace("improved", 5);
  ws.config.require_improved_humanness = true;
  ws.config.require_improved_oracle = true;
  ws.config.selection.mode = SelectionSpec::Mode::none;
  const CampaignResult result = run_campaign(ws.config);
  const RoundResult& round = result.rounds[0];
  CHECK(round.candidates.size() < 40);
  for (const auto& cand : round.candidates) {
    CHECK(cand.scores.at("ninemer_score") > round.starter_scores.at("ninemer_score"));
    CHECK(cand.scores.at("affinity") > round.starter_scores.at("affinity"));
  }
  bool warned = false;
  for (const auto& w : round.warnings) {
    warned = warned || w.find("improvement constraints") != std::string::npos;
  }
  CHECK(warned);
}

TEST_CASE("trajectory audit files are written when requested") {
  Workspace ws = make_workspace("trajectories", 6);
  ws.config.write_trajectories = true;
  ws.config.n_samples = 5;
  run_campaign(ws.config);
  const auto path = fs::path(ws.config.output_dir) / "trajectories.jsonl";
  REQUIRE(fs::exists(path));
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("steps"));
    CHECK(j.at("steps").size() <= 6);
    ++lines;
  }
  CHECK(lines == 5);
}

TEST_CASE("failures leave a MANIFEST naming the stage") {
  Workspace ws = make_workspace("manifest", 7);
  {
    std::ofstream out(ws.dir / "ninemer.tsv");
    out << "corrupted\n";
  }
  CHECK_THROWS_AS(run_campaign(ws.config), Error);
  const auto manifest = fs::path(ws.config.output_dir) / "MANIFEST";
  REQUIRE(fs::exists(manifest));
  const std::string text = read_file(manifest);
  CHECK(text.find("incomplete") != std::string::npos);
  CHECK(text.find("stage:") != std::string::npos);
}

TEST_CASE("campaign config json round trips through load") {
  Workspace ws = make_workspace("configio", 8);
  {
    std::ofstream out(ws.dir / "campaign.json");
    nlohmann::json j;
    j["starter"] = "starter.fasta";
    j["annotation"] = "annotation.json";
    j["output_dir"] = "out_json";
    j["scorer"] = {{"type", "profile"}, {"corpus", "corpus.fasta"}, {"alpha", 0.5}};
    j["oracles"] = {{{"name", "affinity"},
                     {"type", "additive_weights"},
                     {"path", "weights.tsv"},
                     {"tau", 0.3},
                     {"cached", false}}};
    j["sampling"] = {{"method", "gibbs"},
                     {"tau_mlm", 0.9},
                     {"n_samples", 7},
                     {"seed", 123},
                     {"mask_policy", {{"type", "random_bounded"}, {"max_total", 4}}}};
    j["selection"] = {{"mode", "unranked"}, {"k", 3}};
    j["ninemer_db"] = "ninemer.tsv";
    out << j.dump();
  }
  const CampaignConfig config = load_campaign_config((ws.dir / "campaign.json").string());
  CHECK(config.starter_path == (ws.dir / "starter.fasta").string());
  CHECK(config.method == SamplingMethod::gibbs);
  CHECK(config.tau_mlm == 0.9);
  CHECK(config.n_samples == 7);
  CHECK(config.base_seed == 123);
  CHECK(config.mask_policy == "random_bounded");
  CHECK(config.max_total == 4);
  CHECK(config.oracles.size() == 1);
  CHECK_FALSE(config.oracles[0].cached);
  CHECK(config.selection.mode == SelectionSpec::Mode::unranked);
  config.validate();

  const CampaignResult result = run_campaign(config);
  CHECK(result.rounds[0].candidates.size() == 7);
  CHECK(result.rounds[0].selected.size() == 3);

  CampaignConfig missing = config;
  missing.starter_path = (ws.dir / "nope.fasta").string();
  CHECK_THROWS_AS(missing.validate(), Error);
  CampaignConfig bad_rank = config;
  bad_rank.selection.mode = SelectionSpec::Mode::ranked;
  bad_rank.selection.oracle = "unknown";
  CHECK_THROWS_AS(bad_rank.validate(), Error);
}

TEST_CASE("external scorer backs a campaign end to end") {
  Workspace ws = make_workspace("external", 9);
  ws.config.scorer.kind = ScorerSpec::Kind::external;
  ws.config.scorer.command = std::string(MOCK_SCORER_PATH) + " ok";
  ws.config.scorer.path.clear();
  ws.config.n_samples = 10;
  ws.config.workers = 2;
  const CampaignResult result = run_campaign(ws.config);
  CHECK(result.rounds[0].candidates.size() == 10);
}

TEST_CASE("structure oracle builds its cached matrix from coordinate files") {
  Workspace ws = make_workspace("structure", 10);
  constexpr std::size_t kLength = 30;

  // Starter backbone plus one displaced variant per point mutation; the
  // displacement grows with an arbitrary per-mutation amount.
  Rng rng(11);
  BackboneCoordinates starter_coords;
  for (std::size_t i = 0; i < kLength; ++i) {
    starter_coords.coords.push_back(
        {10 * rng.next_double(), 10 * rng.next_double(), 10 * rng.next_double()});
  }
  save_coordinates_xyz((ws.dir / "starter.xyz").string(), starter_coords);
  const fs::path mut_dir = ws.dir / "mutants";
  fs::create_directories(mut_dir);
  for (std::size_t l = 0; l < kLength; ++l) {
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      if (ws.starter.residues[l] == i) continue;
      BackboneCoordinates moved = starter_coords;
      moved.coords[l][0] += 0.05 * static_cast<double>(i + 1);
      const std::string name =
          "pos" + std::to_string(l + 1) + "_" + std::string(1, kAlphabet[i]) + ".xyz";
      save_coordinates_xyz((mut_dir / name).string(), moved);
    }
  }

  OracleSpec structure_spec;
  structure_spec.kind = OracleSpec::Kind::structure;
  structure_spec.name = "structure";
  structure_spec.starter_coords = (ws.dir / "starter.xyz").string();
  structure_spec.mutant_coords_dir = mut_dir.string();
  structure_spec.tau = 0.2;
  ws.config.oracles.push_back(structure_spec);
  ws.config.selection.mode = SelectionSpec::Mode::ranked;
  ws.config.selection.oracle = "structure";
  ws.config.n_samples = 12;

  const CampaignResult result = run_campaign(ws.config);
  const RoundResult& round = result.rounds[0];
  CHECK(round.starter_scores.at("structure") == 0.0);
  for (const auto& cand : round.candidates) {
    CHECK(cand.scores.at("structure") <= 0.0);
  }
  // Ranked-by-structure selection prefers the least-perturbed candidates.
  const auto& selected = round.selected;
  for (std::size_t i = 1; i < selected.size(); ++i) {
    CHECK(selected[i - 1].scores.at("structure") >= selected[i].scores.at("structure"));
  }
}
