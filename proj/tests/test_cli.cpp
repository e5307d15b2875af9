#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = HUMANIZER_CLI_PATH;

int run(const std::string& args, const fs::path& log) {
  const std::string command = kCli + " " + args + " >" + log.string() + " 2>&1";
  return std::system(command.c_str());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("humanizer_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("demo workflow: make-demo, train, build db, humanize") {
  const fs::path dir = fresh_dir("demo");
  const fs::path log = dir / "log.txt";
  REQUIRE(run("make-demo --out " + (dir / "ws").string(), log) == 0);
  for (const char* file : {"starter.fasta", "annotation.json", "corpus.fasta",
                           "affinity_weights.tsv", "config.json"}) {
    CHECK(fs::exists(dir / "ws" / file));
  }

  REQUIRE(run("train-scorer --corpus " + (dir / "ws" / "corpus.fasta").string() +
                  " --out " + (dir / "ws" / "model.json").string(),
              log) == 0);
  const std::string train_log = read_file(log);
  CHECK(train_log.find("200 sequences") != std::string::npos);
  CHECK(train_log.find("length 120") != std::string::npos);

  REQUIRE(run("build-ninemer-db --corpus " + (dir / "ws" / "corpus.fasta").string() +
                  " --out " + (dir / "ws" / "ninemer.tsv").string(),
              log) == 0);

  REQUIRE(run("humanize --config " + (dir / "ws" / "config.json").string() +
                  " --n-samples 25 --seed 7 --out " + (dir / "out1").string(),
              log) == 0);
  CHECK(fs::exists(dir / "out1" / "candidates.csv"));
  CHECK(fs::exists(dir / "out1" / "summary.json"));

  // Same config and seed: byte-identical table. Different seed: different.
  REQUIRE(run("humanize --config " + (dir / "ws" / "config.json").string() +
                  " --n-samples 25 --seed 7 --out " + (dir / "out2").string(),
              log) == 0);
  CHECK(read_file(dir / "out1" / "candidates.csv") ==
        read_file(dir / "out2" / "candidates.csv"));
  REQUIRE(run("humanize --config " + (dir / "ws" / "config.json").string() +
                  " --n-samples 25 --seed 8 --out " + (dir / "out3").string(),
              log) == 0);
  CHECK(read_file(dir / "out1" / "candidates.csv") !=
        read_file(dir / "out3" / "candidates.csv"));
}

TEST_CASE("HUMANIZER_SEED environment variable overrides the configured seed") {
  const fs::path dir = fresh_dir("envseed");
  const fs::path log = dir / "log.txt";
  REQUIRE(run("make-demo --out " + (dir / "ws").string(), log) == 0);
  REQUIRE(run("train-scorer --corpus " + (dir / "ws" / "corpus.fasta").string() +
                  " --out " + (dir / "ws" / "model.json").string(),
              log) == 0);
  REQUIRE(run("build-ninemer-db --corpus " + (dir / "ws" / "corpus.fasta").string() +
                  " --out " + (dir / "ws" / "ninemer.tsv").string(),
              log) == 0);

  const std::string base = "humanize --config " + (dir / "ws" / "config.json").string() +
                           " --n-samples 20 --seed 7 --out ";
  REQUIRE(run(base + (dir / "seed7").string(), log) == 0);
  setenv("HUMANIZER_SEED", "12345", 1);
  REQUIRE(run(base + (dir / "env").string(), log) == 0);
  unsetenv("HUMANIZER_SEED");
  REQUIRE(run("humanize --config " + (dir / "ws" / "config.json").string() +
                  " --n-samples 20 --seed 12345 --out " + (dir / "seed12345").string(),
              log) == 0);
  CHECK(read_file(dir / "env" / "candidates.csv") ==
        read_file(dir / "seed12345" / "candidates.csv"));
  CHECK(read_file(dir / "env" / "candidates.csv") !=
        read_file(dir / "seed7" / "candidates.csv"));
}

TEST_CASE("train-scorer reports ragged and empty corpora") {
  const fs::path dir = fresh_dir("badcorpus");
  const fs::path log = dir / "log.txt";
  {
    std::ofstream out(dir / "ragged.fasta");
    out << ">a\nACDE\n>b\nACD\n";
  }
  CHECK(run("train-scorer --corpus " + (dir / "ragged.fasta").string() + " --out " +
                (dir / "m.json").string(),
            log) != 0);
  CHECK(read_file(log).find("'b'") != std::string::npos);
  {
    std::ofstream out(dir / "empty.fasta");
  }
  CHECK(run("train-scorer --corpus " + (dir / "empty.fasta").string() + " --out " +
                (dir / "m.json").string(),
            log) != 0);
}

TEST_CASE("build-ninemer-db output is reproducible and threshold is recorded") {
  const fs::path dir = fresh_dir("ninemer");
  const fs::path log = dir / "log.txt";
  {
    std::ofstream out(dir / "corpus.fasta");
    out << ">s0\nACDEFGHIKLMN\n>s1\nACDEFGHIKWWW\n>s0\nMNPQRSTVWYAC\n";
  }
  const std::string cmd = "build-ninemer-db --corpus " + (dir / "corpus.fasta").string() +
                          " --threshold 0.25 --out ";
  REQUIRE(run(cmd + (dir / "a.tsv").string(), log) == 0);
  REQUIRE(run(cmd + (dir / "b.tsv").string(), log) == 0);
  const std::string a = read_file(dir / "a.tsv");
  CHECK(a == read_file(dir / "b.tsv"));
  CHECK(a.find("threshold=0.25") != std::string::npos);
  CHECK(a.find("subjects=2") != std::string::npos);
}

TEST_CASE("selfcheck passes on a fresh build and emits machine-readable results") {
  const fs::path dir = fresh_dir("selfcheck");
  const fs::path log = dir / "selfcheck.json";
  REQUIRE(run("selfcheck --json", log) == 0);
  const nlohmann::json checks = nlohmann::json::parse(read_file(log));
  REQUIRE(checks.is_array());
  CHECK(checks.size() >= 6);
  for (const auto& check : checks) {
    CAPTURE(check.at("name").get<std::string>());
    CHECK(check.at("passed").get<bool>());
  }
}

TEST_CASE("selfcheck isolates a corrupted model file") {
  const fs::path dir = fresh_dir("selfcheck_bad");
  const fs::path log = dir / "selfcheck.json";
  {
    std::ofstream out(dir / "model.json");
    out << "{ not json";
  }
  CHECK(run("selfcheck --json --model " + (dir / "model.json").string(), log) != 0);
  const nlohmann::json checks = nlohmann::json::parse(read_file(log));
  std::size_t passed = 0;
  bool scorer_failed = false;
  for (const auto& check : checks) {
    if (check.at("passed").get<bool>()) ++passed;
    if (check.at("name") == "scorer" && !check.at("passed").get<bool>()) {
      scorer_failed = true;
    }
  }
  CHECK(scorer_failed);
  CHECK(passed >= 5);  // the other checks still ran and passed
}

TEST_CASE("unknown arguments fail cleanly") {
  const fs::path dir = fresh_dir("badargs");
  const fs::path log = dir / "log.txt";
  CHECK(run("frobnicate", log) != 0);
  CHECK(run("humanize", log) != 0);  // --config is required
}
