#include <doctest.h>

#include <cmath>
#include <set>

#include "sell/rng.hpp"

using sell::Rng;

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  CHECK(Rng(42).next_u64() != c.next_u64());
}

TEST_CASE("split streams are deterministic and distinct") {
  const Rng root(7);
  Rng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  const auto v = s1.next_u64();
  CHECK(v == s1b.next_u64());
  CHECK(v != s2.next_u64());
}

TEST_CASE("uniform stays in range and has the right mean") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK_THROWS(rng.uniform(1.0, 1.0));
}

TEST_CASE("gaussian moments") {
  Rng rng(2);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian(1.0, 0.5);
    s += g;
    s2 += g * g;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  CHECK(var == doctest::Approx(0.25).epsilon(0.02));
  CHECK(rng.gaussian(3.0, 0.0) == 3.0);
}

TEST_CASE("below covers the range without bias at the edges") {
  Rng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}
