#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "humanizer/error.hpp"
#include "humanizer/logits.hpp"
#include "humanizer/oracle.hpp"
#include "humanizer/rng.hpp"
#include "humanizer/structure.hpp"
#include "humanizer/testkit/oracles.hpp"

using namespace humanizer;
using testkit::AdditiveOracle;
using testkit::PairwiseEpistaticOracle;

namespace {

AntibodySequence random_sequence(std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  AntibodySequence seq;
  seq.id = "s" + std::to_string(seed);
  for (std::size_t i = 0; i < length; ++i) {
    seq.residues.push_back(static_cast<Residue>(rng.next_below(kAlphabetSize)));
  }
  return seq;
}

AntibodySequence mutate(const AntibodySequence& seq, std::size_t distance, Rng& rng) {
  AntibodySequence out = seq;
  for (std::size_t k = 0; k < distance; ++k) {
    const std::size_t pos = rng.next_below(out.length());
    out.residues[pos] = static_cast<Residue>(
        (out.residues[pos] + 1 + rng.next_below(kAlphabetSize - 1)) % kAlphabetSize);
  }
  return out;
}

}  // namespace

TEST_CASE("cache_oracle stores L x 20 point evaluations") {
  const AntibodySequence starter = random_sequence(100, 1);
  const AdditiveOracle oracle = AdditiveOracle::random(100, 1.0, 2);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  CHECK(matrix.length() == 100);
  CHECK(matrix.values.size() * kAlphabetSize == 2000);
  CHECK(matrix.matches(starter));

  // The starter's own residue column reproduces the unmutated starter score.
  const double starter_value = oracle.value(starter);
  for (std::size_t l = 0; l < 100; ++l) {
    CHECK(matrix.values[l][starter.residues[l]] ==
          doctest::Approx(starter_value).epsilon(1e-12));
  }
}

TEST_CASE("cached matrix entries match the additive closed form") {
  const AntibodySequence starter = random_sequence(15, 3);
  const AdditiveOracle oracle = AdditiveOracle::random(15, 0.8, 4);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  double rest_total = 0;
  for (std::size_t m = 0; m < starter.length(); ++m) {
    rest_total += oracle.weights()[m][starter.residues[m]];
  }
  for (std::size_t l = 0; l < starter.length(); ++l) {
    const double rest = rest_total - oracle.weights()[l][starter.residues[l]];
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      CHECK(matrix.values[l][i] ==
            doctest::Approx(oracle.weights()[l][i] + rest).epsilon(1e-12));
    }
  }
}

TEST_CASE("cached_point_scores at distance zero equals a fresh evaluation") {
  const AntibodySequence starter = random_sequence(12, 5);
  const AdditiveOracle oracle = AdditiveOracle::random(12, 1.0, 6);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  for (std::size_t l = 0; l < starter.length(); ++l) {
    CHECK(cached_point_scores(matrix, starter, l) == oracle.point_scores(starter, l));
  }
}

TEST_CASE("additive oracle: cached row differs from fresh by a constant shift only") {
  const AntibodySequence starter = random_sequence(12, 7);
  const AdditiveOracle oracle = AdditiveOracle::random(12, 1.0, 8);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const AntibodySequence moved = mutate(starter, 1 + rng.next_below(4), rng);
    const std::size_t l = rng.next_below(starter.length());
    const LogitsRow cached = cached_point_scores(matrix, moved, l);
    const LogitsRow fresh = oracle.point_scores(moved, l);
    double lo = fresh[0] - cached[0], hi = lo;
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      lo = std::min(lo, fresh[i] - cached[i]);
      hi = std::max(hi, fresh[i] - cached[i]);
    }
    CHECK(hi - lo < 1e-9);
    const LogitsRow p_cached = softmax_temp(cached, 0.4);
    const LogitsRow p_fresh = softmax_temp(fresh, 0.4);
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      CHECK(std::abs(p_cached[i] - p_fresh[i]) < 1e-12);
    }
  }
}

TEST_CASE("epistatic oracle: cached and fresh rows genuinely diverge at distance 3") {
  const AntibodySequence starter = random_sequence(12, 10);
  const PairwiseEpistaticOracle oracle =
      PairwiseEpistaticOracle::random(12, 0.5, {{2, 7}, {3, 9}}, 2.0, 11);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  Rng rng(12);
  double max_abs_deviation = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const AntibodySequence moved = mutate(starter, 3, rng);
    const std::size_t l = rng.next_below(starter.length());
    const LogitsRow p_cached = softmax_temp(cached_point_scores(matrix, moved, l), 0.4);
    const LogitsRow p_fresh = softmax_temp(oracle.point_scores(moved, l), 0.4);
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      max_abs_deviation = std::max(max_abs_deviation, std::abs(p_cached[i] - p_fresh[i]));
    }
  }
  CHECK(max_abs_deviation > 1e-3);
  MESSAGE("max abs probability deviation at distance 3: ", max_abs_deviation);
}

TEST_CASE("approx_value is exact for additive oracles at any distance") {
  const AntibodySequence starter = random_sequence(18, 13);
  const AdditiveOracle oracle = AdditiveOracle::random(18, 0.7, 14);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const AntibodySequence moved = mutate(starter, rng.next_below(10), rng);
    CHECK(matrix.approx_value(moved, starter) ==
          doctest::Approx(oracle.value(moved)).epsilon(1e-10));
  }
}

TEST_CASE("score matrix tsv round trip preserves values and starter hash") {
  const AntibodySequence starter = random_sequence(9, 16);
  const AdditiveOracle oracle = AdditiveOracle::random(9, 1.0, 17);
  const OracleScoreMatrix matrix = cache_oracle(oracle, starter);
  const auto path =
      (std::filesystem::temp_directory_path() / "humanizer_oracle_matrix.tsv").string();
  save_score_matrix_tsv(path, matrix);
  const OracleScoreMatrix loaded = load_score_matrix_tsv(path);
  CHECK(loaded.values == matrix.values);
  CHECK(loaded.starter_hash == matrix.starter_hash);
  CHECK(loaded.matches(starter));
  CHECK_FALSE(loaded.matches(random_sequence(9, 18)));
}

TEST_CASE("ensemble minimum bounds every member") {
  const std::size_t length = 10;
  std::vector<std::shared_ptr<const AttributeOracle>> members;
  for (std::uint64_t k = 0; k < 4; ++k) {
    members.push_back(
        std::make_shared<AdditiveOracle>(AdditiveOracle::random(length, 1.0, 20 + k)));
  }
  const EnsembleOracle ensemble(members);
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const AntibodySequence seq = random_sequence(length, 400 + trial);
    const std::size_t l = rng.next_below(length);
    const LogitsRow combined = ensemble.point_scores(seq, l);
    for (const auto& member : members) {
      const LogitsRow s = member->point_scores(seq, l);
      for (std::size_t i = 0; i < kAlphabetSize; ++i) CHECK(combined[i] <= s[i] + 1e-12);
    }
  }
}

TEST_CASE("ensemble mean reduction averages members") {
  const std::size_t length = 6;
  std::vector<std::shared_ptr<const AttributeOracle>> members{
      std::make_shared<AdditiveOracle>(AdditiveOracle::random(length, 1.0, 30)),
      std::make_shared<AdditiveOracle>(AdditiveOracle::random(length, 1.0, 31))};
  const EnsembleOracle ensemble(members, EnsembleReduction::mean);
  const AntibodySequence seq = random_sequence(length, 32);
  const LogitsRow a = members[0]->point_scores(seq, 2);
  const LogitsRow b = members[1]->point_scores(seq, 2);
  const LogitsRow m = ensemble.point_scores(seq, 2);
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    CHECK(m[i] == doctest::Approx((a[i] + b[i]) / 2).epsilon(1e-12));
  }
}

TEST_CASE("oracle_value equals the additive landscape value") {
  const AdditiveOracle oracle = AdditiveOracle::random(11, 0.9, 33);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AntibodySequence seq = random_sequence(11, 500 + seed);
    CHECK(oracle_value(oracle, seq) == doctest::Approx(oracle.value(seq)).epsilon(1e-12));
  }
}

TEST_CASE("fresh oracle source substitutes starter residues at masked positions") {
  const AntibodySequence starter = random_sequence(10, 34);
  auto oracle = std::make_shared<AdditiveOracle>(AdditiveOracle::random(10, 1.0, 35));
  const FreshOracleSource source(oracle, starter);
  AntibodySequence masked = starter;
  masked.residues[2] = kMaskResidue;
  masked.residues[6] = kMaskResidue;
  CHECK(source.point_scores(masked, 4) == oracle->point_scores(starter, 4));
  AntibodySequence moved = starter;
  moved.residues[3] = static_cast<Residue>((starter.residues[3] + 1) % kAlphabetSize);
  CHECK(source.point_scores(moved, 4) == oracle->point_scores(moved, 4));
}

// --- structure scoring ---

namespace {

BackboneCoordinates random_coords(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  BackboneCoordinates bc;
  for (std::size_t i = 0; i < n; ++i) {
    bc.coords.push_back(
        {10 * rng.next_double(), 10 * rng.next_double(), 10 * rng.next_double()});
  }
  return bc;
}

BackboneCoordinates rigid_transform(const BackboneCoordinates& bc) {
  // 90 degrees about z, then translate by (1, 2, 3).
  BackboneCoordinates out;
  for (const auto& p : bc.coords) {
    out.coords.push_back({-p[1] + 1, p[0] + 2, p[2] + 3});
  }
  return out;
}

}  // namespace

TEST_CASE("kabsch aligns identity exactly") {
  const BackboneCoordinates reference = random_coords(12, 40);
  const BackboneCoordinates aligned = kabsch_align(reference, reference);
  CHECK(rmsd(aligned, reference) < 1e-9);
}

TEST_CASE("kabsch recovers a known rigid transform") {
  const BackboneCoordinates reference = random_coords(15, 41);
  const BackboneCoordinates mobile = rigid_transform(reference);
  const BackboneCoordinates aligned = kabsch_align(mobile, reference);
  CHECK(rmsd(aligned, reference) < 1e-6);
}

TEST_CASE("kabsch never increases the rmsd of a perturbed copy") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const BackboneCoordinates reference = random_coords(10, 43 + trial);
    BackboneCoordinates perturbed = reference;
    perturbed.coords[rng.next_below(10)][rng.next_below(3)] += 2.5;
    const double before = rmsd(perturbed, reference);
    const double after = rmsd(kabsch_align(perturbed, reference), reference);
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("kabsch is idempotent") {
  const BackboneCoordinates reference = random_coords(10, 60);
  BackboneCoordinates mobile = random_coords(10, 61);
  const BackboneCoordinates once = kabsch_align(mobile, reference);
  const BackboneCoordinates twice = kabsch_align(once, reference);
  CHECK(rmsd(once, twice) < 1e-9);
}

TEST_CASE("kabsch rejects degenerate point sets") {
  BackboneCoordinates collinear;
  for (int i = 0; i < 5; ++i) {
    collinear.coords.push_back({static_cast<double>(i), 0.0, 0.0});
  }
  const BackboneCoordinates reference = random_coords(5, 44);
  CHECK_THROWS_WITH_AS(kabsch_align(collinear, reference), doctest::Contains("degenerate"),
                       Error);
  BackboneCoordinates pair = random_coords(2, 45);
  CHECK_THROWS_AS(kabsch_align(pair, random_coords(2, 46)), Error);
}

TEST_CASE("structure score, hand cases") {
  const BackboneCoordinates starter = random_coords(10, 47);
  CHECK(structure_score_prealigned(starter, starter) == 0.0);

  BackboneCoordinates displaced = starter;
  displaced.coords[4][1] += 3.0;
  CHECK(structure_score_prealigned(displaced, starter) ==
        doctest::Approx(-1.0 / 300.0).epsilon(1e-12));
  CHECK(structure_score_prealigned(displaced, starter) < 0.0);
}

TEST_CASE("structure score with alignment is rigid-transform invariant") {
  const BackboneCoordinates starter = random_coords(20, 48);
  BackboneCoordinates candidate = starter;
  candidate.coords[3][0] += 1.0;
  candidate.coords[11][2] -= 0.5;
  const double direct = structure_score(candidate, starter);
  const double transformed = structure_score(rigid_transform(candidate), starter);
  CHECK(std::abs(direct - transformed) < 1e-6);
  CHECK(direct < 0.0);
  CHECK(structure_score(rigid_transform(starter), starter) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("coordinate files load in both layouts") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  const auto xyz = (dir / "humanizer_coords.xyz").string();
  const BackboneCoordinates original = random_coords(7, 49);
  save_coordinates_xyz(xyz, original);
  const BackboneCoordinates loaded = load_coordinates(xyz);
  CHECK(loaded.coords == original.coords);

  const auto indexed = (dir / "humanizer_coords_indexed.txt").string();
  {
    std::ofstream out(indexed);
    out.precision(17);
    out << "# alpha carbons\n";
    for (std::size_t i = 0; i < original.length(); ++i) {
      out << i + 1 << ' ' << original.coords[i][0] << ' ' << original.coords[i][1] << ' '
          << original.coords[i][2] << '\n';
    }
  }
  const BackboneCoordinates loaded_indexed = load_coordinates(indexed);
  REQUIRE(loaded_indexed.length() == original.length());
  for (std::size_t i = 0; i < original.length(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(loaded_indexed.coords[i][k] ==
            doctest::Approx(original.coords[i][k]).epsilon(1e-6));
    }
  }
}
