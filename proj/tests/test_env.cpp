#include "smoothscale/env.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdint>

#include "smoothscale/rng.hpp"

using namespace smoothscale;

namespace {

// Brute-force torus block mean via per-cell intensity reads.
double brute_average(const Environment& env, std::uint64_t i, std::uint64_t j,
                     std::uint32_t ell) {
  const std::uint64_t len = 1ull << ell;
  double sum = 0;
  for (std::uint64_t a = 0; a < len; ++a)
    for (std::uint64_t b = 0; b < len; ++b) sum += env.intensity(i + a, j + b);
  return sum / static_cast<double>(len * len);
}

void check_against_brute(const Environment& env, std::uint64_t i, std::uint64_t j,
                         std::uint32_t ell) {
  INFO("env " << kind_name(env.kind()) << " i=" << i << " j=" << j << " ell=" << ell);
  REQUIRE(env.block_average(i, j, ell) ==
          Catch::Approx(brute_average(env, i, j, ell)).epsilon(0).margin(0x1.0p-30));
}

}  // namespace

TEST_CASE("checkerboard parity and exact half blocks") {
  auto env = make_checkerboard(4);
  REQUIRE(env.intensity(0, 0) == 0.0);
  REQUIRE(env.intensity(0, 1) == 1.0);
  REQUIRE(env.intensity(1, 0) == 1.0);
  REQUIRE(env.block_average(1, 2, 0) == 1.0);
  for (std::uint64_t i = 0; i < 4; ++i)
    for (std::uint64_t j = 0; j < 4; ++j) {
      REQUIRE(env.block_average(i, j, 1) == 0.5);  // exactly, not approximately
      REQUIRE(env.block_average(i, j, 1) == Catch::Approx(brute_average(env, i, j, 1)));
    }
  REQUIRE(env.block_average(3, 3, 2) == 0.5);
  REQUIRE_THROWS_AS(make_checkerboard(12), InvalidParameter);
  REQUIRE_THROWS_AS(make_checkerboard(0), InvalidParameter);
}

TEST_CASE("megacell closed-form block averages") {
  auto env = make_megacell(8, 1);
  REQUIRE(env.intensity(0, 0) == 0.0);
  REQUIRE(env.intensity(0, 2) == 1.0);
  REQUIRE(env.intensity(1, 1) == 0.0);
  REQUIRE(env.block_average(0, 0, 1) == 0.0);  // block = one aligned 0-mega-cell
  REQUIRE(env.block_average(0, 0, 2) == Catch::Approx(brute_average(env, 0, 0, 2)));
  REQUIRE(env.block_average(0, 0, 2) == 0.5);  // 2x2 mega-cells from a corner

  auto big = make_megacell(64, 3);
  CounterRng rng(5);
  for (int t = 0; t < 300; ++t)
    check_against_brute(big, rng.next_below(64), rng.next_below(64),
                        static_cast<std::uint32_t>(rng.next_below(7)));

  REQUIRE_THROWS_AS(make_megacell(8, 4), InvalidParameter);
}

TEST_CASE("prefix walk column rule, k=2 hand trace") {
  // k-LSBs of j read most-significant-first; bit 1 -> +1, bit 0 -> -1;
  // first prefix sum hitting +-2 freezes the (extreme) value, else the
  // full sum is used; raw in [-2,2] rescales to [0,1].
  auto env = make_prefix_walk(16, 2);
  const double expected[4] = {0.0, 0.5, 0.5, 1.0};  // j mod 4 = 0("00"),1("01"),2("10"),3("11")
  for (std::uint64_t j = 0; j < 16; ++j) {
    for (std::uint64_t i = 0; i < 16; ++i)
      REQUIRE(env.intensity(i, j) == expected[j % 4]);  // constant along columns
  }
  REQUIRE(env.info().extreme_fraction == 0.5);  // exhaustive enumeration over j
}

TEST_CASE("prefix walk frozen spot values, k=16") {
  auto env = make_prefix_walk(1u << 17, 16);
  struct Spot {
    std::uint64_t j;
    double value;
  };
  // Hand-enumerated walks (two_m = 4, denominator 8).
  const Spot spots[] = {{0, 0.0},      {1, 0.0},     {0xffff, 1.0}, {0xaaaa, 0.5},
                        {0x0f0f, 0.0}, {12345, 0.0}, {54321, 0.25}};
  for (const auto& s : spots) REQUIRE(env.intensity(3, s.j) == s.value);
  // Enumerated over all 2^16 column patterns: 2703/4096 columns are extreme.
  REQUIRE(env.info().extreme_fraction == Catch::Approx(2703.0 / 4096).epsilon(0).margin(1e-15));

  CounterRng rng(19);
  for (int t = 0; t < 200; ++t)
    check_against_brute(env, rng.next_below(1u << 17), rng.next_below(1u << 17),
                        static_cast<std::uint32_t>(rng.next_below(6)));
}

TEST_CASE("prefix walk rejects invalid parameters naming valid k") {
  REQUIRE_THROWS_AS(make_prefix_walk(1024, 3), InvalidParameter);
  REQUIRE_THROWS_AS(make_prefix_walk(1024, 4), InvalidParameter);  // log2=2 not square
  REQUIRE_THROWS_WITH(make_prefix_walk(1024, 3),
                      Catch::Matchers::ContainsSubstring("2, 16, 512"));
  REQUIRE_THROWS_AS(make_prefix_walk(1024, 16), InvalidParameter);  // side <= 2^k
  REQUIRE_NOTHROW(make_prefix_walk(1u << 17, 16));
}

TEST_CASE("row gradient and constant") {
  auto grad = make_row_gradient(4);
  for (std::uint64_t j = 0; j < 4; ++j) REQUIRE(grad.intensity(2, j) == 0.5);
  REQUIRE(grad.block_average(1, 3, 1) == Catch::Approx((0.25 + 0.5) / 2));
  CounterRng rng(3);
  auto grad256 = make_row_gradient(256);
  for (int t = 0; t < 200; ++t)
    check_against_brute(grad256, rng.next_below(256), rng.next_below(256),
                        static_cast<std::uint32_t>(rng.next_below(9)));

  auto c = make_constant(8, 0.7);
  for (std::uint32_t ell = 0; ell <= 3; ++ell)
    REQUIRE(c.block_average(5, 6, ell) == 0.7);
  REQUIRE_THROWS_AS(make_constant(8, 1.5), InvalidParameter);
  REQUIRE_THROWS_AS(make_constant(8, -0.1), InvalidParameter);
}

TEST_CASE("iid uniform mean obeys the law of large numbers") {
  auto env = make_iid_uniform(1u << 10, 42);
  double sum = 0;
  const std::uint32_t n = env.side();
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) sum += env.intensity(i, j);
  const double mean = sum / (double(n) * n);
  // sd of the mean over N^2 iid cells: (1/sqrt 12)/N ~ 2.82e-4; allow 3 sigma.
  REQUIRE(std::abs(mean - 0.5) < 3 * 2.82e-4);
  // reproducibility
  auto env2 = make_iid_uniform(1u << 10, 42);
  REQUIRE(env2.intensity(17, 923) == env.intensity(17, 923));
  auto env3 = make_iid_uniform(1u << 10, 43);
  REQUIRE(env3.intensity(17, 923) != env.intensity(17, 923));
}

TEST_CASE("dense block averages match brute force") {
  auto env = make_iid_uniform(1u << 10, 7);
  CounterRng rng(13);
  for (int t = 0; t < 200; ++t)
    check_against_brute(env, rng.next_below(1u << 10), rng.next_below(1u << 10),
                        static_cast<std::uint32_t>(rng.next_below(6)));
  // wraparound anchored at the far edge
  check_against_brute(env, (1u << 10) - 1, 511, 1);
  check_against_brute(env, (1u << 10) - 3, (1u << 10) - 5, 3);
}

TEST_CASE("every backend matches brute force exhaustively at side 16") {
  const Environment envs[] = {
      make_checkerboard(16),   make_megacell(16, 2), make_prefix_walk(16, 2),
      make_row_gradient(16),   make_constant(16, 0.3), make_iid_uniform(16, 99),
  };
  for (const auto& env : envs)
    for (std::uint32_t ell = 0; ell <= 4; ++ell)
      for (std::uint64_t i = 0; i < 16; ++i)
        for (std::uint64_t j = 0; j < 16; ++j) check_against_brute(env, i, j, ell);
}

TEST_CASE("dyadic consistency: children average to the parent") {
  const Environment envs[] = {make_iid_uniform(64, 1), make_megacell(64, 2),
                              make_prefix_walk(64, 2), make_row_gradient(64)};
  CounterRng rng(21);
  for (const auto& env : envs)
    for (int t = 0; t < 100; ++t) {
      std::uint32_t ell = 1 + static_cast<std::uint32_t>(rng.next_below(5));
      std::uint64_t i = rng.next_below(64), j = rng.next_below(64);
      const std::uint64_t h = 1ull << (ell - 1);
      double parent = env.block_average(i, j, ell);
      double kids = (env.block_average(i, j, ell - 1) +
                     env.block_average(i, j + h, ell - 1) +
                     env.block_average(i + h, j, ell - 1) +
                     env.block_average(i + h, j + h, ell - 1)) /
                    4.0;
      REQUIRE(parent == Catch::Approx(kids).epsilon(0).margin(0x1.0p-30));
    }
}

TEST_CASE("block scale above the side is rejected") {
  auto env = make_checkerboard(16);
  REQUIRE_THROWS_AS(env.block_average(0, 0, 5), InvalidParameter);
  REQUIRE_NOTHROW(env.block_average(0, 0, 4));
}
