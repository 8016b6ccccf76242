#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>

#include "brlogit/rng.hpp"

using namespace brlogit;
using Catch::Approx;

TEST_CASE("Philox 4x64-10 known-answer vectors", "[rng]") {
  // Reference outputs generated with an independent implementation of the
  // Philox 4x64 counter cipher (10 rounds), two consecutive blocks each.
  struct Kat {
    std::array<std::uint64_t, 2> key;
    std::array<std::uint64_t, 4> ctr;
    std::array<std::uint64_t, 8> out;
  };
  const Kat kats[] = {
      {{0x0ULL, 0x0ULL},
       {0x0ULL, 0x0ULL, 0x0ULL, 0x0ULL},
       {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
        0x907d7a052fd5b4dcULL, 0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
        0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL}},
      {{0xdeadbeefULL, 0xcafef00dULL},
       {0x1ULL, 0x2ULL, 0x3ULL, 0x4ULL},
       {0xbe50cc8d71b94ed3ULL, 0x24145edfdabb5069ULL, 0x2dc42591c5253a4bULL,
        0x925d19fbe559e7a9ULL, 0x4b811f0561dafa5aULL, 0xc94e3d7d3d236556ULL,
        0xcea5b823c5d147f7ULL, 0x072eef71c66006ecULL}},
      {{0xffffffffffffffffULL, 0xffffffffffffffffULL},
       {0xffffffffffffffffULL, 0xffffffffffffffffULL, 0xffffffffffffffffULL,
        0xffffffffffffffffULL},
       {0x44b7493d1acfc229ULL, 0x6636af8e997921ddULL, 0x3f73e132b5b3780eULL,
        0x605644dde03b01b1ULL, 0x6d46cc0e71f0be7eULL, 0x924ea1693f9a8bc0ULL,
        0xfdc35f0198c91181ULL, 0xb4a311f17aa6568dULL}},
      {{0x2aULL, 0x0ULL},
       {0x0ULL, 0x7ULL, 0x0ULL, 0x0ULL},
       {0x7344a9dbbba9c04dULL, 0x4e54f097a868198dULL, 0x8df50c8b929a196dULL,
        0x08ff86aaec6906f8ULL, 0x2db29e1678ab2a4aULL, 0x8e2aa58b775371feULL,
        0x05f347ede68afb8bULL, 0xb50ee6c9cddf6b9aULL}},
  };
  // Each block encrypts the counter after an add-with-carry advance, so the
  // first outputs belong to ctr+1, the next four to ctr+2.
  const auto advance = [](std::array<std::uint64_t, 4> c) {
    for (int w = 0; w < 4 && ++c[w] == 0; ++w) {
    }
    return c;
  };
  for (const Kat& k : kats) {
    const auto ctr1 = advance(k.ctr);
    const auto first = philox4x64(ctr1, k.key);
    const auto second = philox4x64(advance(ctr1), k.key);
    for (int i = 0; i < 4; ++i) {
      CHECK(first[static_cast<size_t>(i)] == k.out[static_cast<size_t>(i)]);
      CHECK(second[static_cast<size_t>(i)] == k.out[static_cast<size_t>(i + 4)]);
    }
  }
}

TEST_CASE("CounterRng streams the keyed block sequence", "[rng]") {
  CounterRng g(42, 0, 7);
  // key = (42, 0), counter starts at (0, 7, 0, 0): same as the last KAT.
  CHECK(g.next_u64() == 0x7344a9dbbba9c04dULL);
  CHECK(g.next_u64() == 0x4e54f097a868198dULL);
  CHECK(g.next_u64() == 0x8df50c8b929a196dULL);
  CHECK(g.next_u64() == 0x08ff86aaec6906f8ULL);
  CHECK(g.next_u64() == 0x2db29e1678ab2a4aULL);  // second block
}

TEST_CASE("identical keys replay, different keys diverge", "[rng]") {
  CounterRng a(9001, 1, 3), b(9001, 1, 3);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  CounterRng c(9001, 1, 4), d(9001, 2, 3), e(9002, 1, 3);
  bool all_equal_c = true, all_equal_d = true, all_equal_e = true;
  CounterRng ref(9001, 1, 3);
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t v = ref.next_u64();
    all_equal_c = all_equal_c && (c.next_u64() == v);
    all_equal_d = all_equal_d && (d.next_u64() == v);
    all_equal_e = all_equal_e && (e.next_u64() == v);
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
  CHECK_FALSE(all_equal_e);
}

TEST_CASE("uniforms live strictly inside the unit interval", "[rng]") {
  CounterRng g(7, 0, 0);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(sum / n == Approx(0.5).margin(0.005));
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("normals have the right first two moments", "[rng]") {
  CounterRng g(123, 5, 9);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == Approx(0.0).margin(0.01));
  CHECK(var == Approx(1.0).margin(0.02));
}

TEST_CASE("bernoulli tracks its probability", "[rng]") {
  CounterRng g(55, 1, 2);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += g.bernoulli(0.3) ? 1 : 0;
  CHECK(static_cast<double>(ones) / n == Approx(0.3).margin(0.01));
}
