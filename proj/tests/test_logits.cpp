#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "humanizer/error.hpp"
#include "humanizer/logits.hpp"
#include "humanizer/rng.hpp"

using namespace humanizer;

TEST_CASE("softmax_temp uniform case") {
  LogitsRow z{};
  const LogitsRow p = softmax_temp(z, 1.0);
  double total = 0;
  for (double v : p) {
    CHECK(v == doctest::Approx(0.05).epsilon(1e-12));
    total += v;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("softmax_temp single spike") {
  LogitsRow z{};
  z[0] = 1.0;
  const LogitsRow p = softmax_temp(z, 1.0);
  const double e = std::exp(1.0);
  CHECK(p[0] == doctest::Approx(e / (e + 19)).epsilon(1e-12));
}

TEST_CASE("low temperature concentrates on the max") {
  Rng rng(5);
  LogitsRow z;
  for (double& v : z) v = rng.next_double();
  const LogitsRow p = softmax_temp(z, 0.01);
  CHECK(p[argmax_row(z)] > 0.999);
}

TEST_CASE("softmax_temp is invariant to constant shifts") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    LogitsRow z;
    for (double& v : z) v = 10 * (rng.next_double() - 0.5);
    const double shift = 100 * (rng.next_double() - 0.5);
    LogitsRow shifted = z;
    for (double& v : shifted) v += shift;
    const LogitsRow p = softmax_temp(z, 0.7);
    const LogitsRow q = softmax_temp(shifted, 0.7);
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
      CHECK(std::abs(p[i] - q[i]) <= 1e-12);
    }
  }
}

TEST_CASE("softmax rejects bad input") {
  LogitsRow z{};
  CHECK_THROWS_AS(softmax_temp(z, 0.0), Error);
  CHECK_THROWS_AS(softmax_temp(z, -1.0), Error);
  z[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(softmax_temp(z, 1.0), Error);
}

TEST_CASE("poe_row with no experts is z over tau") {
  LogitsRow z;
  for (std::size_t i = 0; i < kAlphabetSize; ++i) z[i] = static_cast<double>(i);
  const LogitsRow out = poe_row(z, 2.0, {}, {});
  for (std::size_t i = 0; i < kAlphabetSize; ++i) CHECK(out[i] == z[i] / 2.0);
}

TEST_CASE("constant expert changes nothing, bitwise") {
  Rng rng(7);
  LogitsRow z;
  for (double& v : z) v = rng.next_double();
  LogitsRow constant;
  constant.fill(3.7);
  const std::vector<LogitsRow> experts{constant};
  const std::vector<double> temps{0.4};
  const LogitsRow guided = poe_row(z, 1.3, experts, temps);
  const LogitsRow unguided = poe_row(z, 1.3, {}, {});
  CHECK(guided == unguided);
}

TEST_CASE("poe hand case: ln4 spike gives 4/23") {
  LogitsRow z{};
  LogitsRow spike{};
  spike[9] = std::log(4.0);
  const std::vector<LogitsRow> experts{spike};
  const std::vector<double> temps{1.0};
  const LogitsRow p = softmax_temp(poe_row(z, 1.0, experts, temps), 1.0);
  CHECK(std::abs(p[9] - 4.0 / 23.0) < 1e-9);
}

TEST_CASE("poe_row validates lengths") {
  LogitsRow z{};
  const std::vector<LogitsRow> experts{LogitsRow{}};
  const std::vector<double> temps{1.0, 2.0};
  CHECK_THROWS_AS(poe_row(z, 1.0, experts, temps), Error);
}

TEST_CASE("argmax ties break to the lowest index") {
  LogitsRow z{};
  z[4] = 1.0;
  z[11] = 1.0;
  CHECK(argmax_row(z) == 4);
  LogitsRow flat{};
  CHECK(argmax_row(flat) == 0);
}

TEST_CASE("sample_categorical one-hot") {
  LogitsRow p{};
  p[13] = 1.0;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) CHECK(sample_categorical(p, rng) == 13);
}

TEST_CASE("sample_categorical rejects bad distributions") {
  LogitsRow p{};
  p[0] = 0.5;
  Rng rng(9);
  CHECK_THROWS_AS(sample_categorical(p, rng), Error);  // does not sum to 1
  p[1] = 0.6;
  p[2] = -0.1;
  CHECK_THROWS_AS(sample_categorical(p, rng), Error);  // negative entry
}

TEST_CASE("sample_categorical uniform frequencies at a million draws") {
  LogitsRow p;
  p.fill(0.05);
  Rng rng(10);
  std::array<std::size_t, kAlphabetSize> counts{};
  constexpr std::size_t kDraws = 1000000;
  for (std::size_t i = 0; i < kDraws; ++i) ++counts[sample_categorical(p, rng)];
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    const double freq = static_cast<double>(counts[i]) / kDraws;
    CHECK(std::abs(freq - 0.05) < 0.002);
  }
}

TEST_CASE("fixed seed gives identical draw sequences") {
  LogitsRow p;
  p.fill(0.05);
  Rng a(77), b(77);
  for (int i = 0; i < 1000; ++i) CHECK(sample_categorical(p, a) == sample_categorical(p, b));
}
