#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "sell/cascade.hpp"
#include "sell/errors.hpp"
#include "sell/rng.hpp"
#include "sell/training.hpp"

using namespace sell;

namespace {

Cascade random_acdc(std::size_t n, std::size_t k, std::uint64_t seed, double bias_std = 0.0) {
  Cascade c = make_acdc_cascade(n, k, seed);
  Rng rng(seed);
  initialize(c, InitScheme::identity_noise(0.3), rng);
  for (auto& p : c.params()) {
    if (p.group != ParamGroup::bias) continue;
    for (auto& v : p.value) v = rng.gaussian(0.0, bias_std);
  }
  return c;
}

Cascade random_afdf(std::size_t n, std::size_t k, std::uint64_t seed) {
  Cascade c = make_afdf_cascade(n, k, seed);
  Rng rng(seed);
  initialize(c, InitScheme::identity_noise(0.3), rng);
  return c;
}

ComplexMatrix random_complex(Rng& rng, std::size_t rows, std::size_t n) {
  return {rand_gaussian(rng, rows, n, 0.0, 1.0), rand_gaussian(rng, rows, n, 0.0, 1.0)};
}

}  // namespace

TEST_CASE("linear cascade equals its materialized matrix") {
  Rng rng(1);
  for (std::size_t k : {1, 2, 4, 8}) {
    for (std::size_t n : {4, 8, 32}) {
      const Cascade c = random_acdc(n, k, 100 + k, 0.5);
      const Matrix x = rand_gaussian(rng, 5, n, 0.0, 1.0);
      const Matrix w = materialize(c);
      // materialize() drops biases; add the constant offset back.
      Matrix expected = oracle::matmul(x, w);
      const Matrix off = materialize_offset(c);
      for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t j = 0; j < n; ++j) expected(r, j) += off(0, j);
      }
      CHECK(max_abs_diff(c.apply(x), expected) < 1e-10);
    }
  }
}

TEST_CASE("materialized single layer agrees with the cascade of one") {
  Cascade c = random_acdc(8, 1, 5);
  const auto& layer = std::get<AcdcLayer>(c.layers()[0]);
  CHECK(max_abs_diff(materialize(layer), materialize(c)) < 1e-14);
}

TEST_CASE("cascade forward equals apply and layers chain") {
  Cascade c = make_acdc_relu_stack(8, 3, 4);
  Rng rng(4);
  initialize(c, InitScheme::identity_noise(0.2), rng);
  const Matrix x = rand_gaussian(rng, 3, 8, 0.0, 1.0);
  CHECK(max_abs_diff(c.forward(x), c.apply(x)) == 0.0);
  CHECK_FALSE(c.is_linear());
  CHECK(c.is_real());
  CHECK_THROWS_AS(c.add(DenseLayer(4, 2)), DimensionError);
  CHECK_THROWS_AS(materialize(c), UnsupportedError);
}

TEST_CASE("ACDC-ReLU stack layout") {
  const Cascade c = make_acdc_relu_stack(8, 3, 1);
  REQUIRE(c.depth() == 7);
  CHECK(layer_kind(c.layers()[0]) == "acdc");
  CHECK(layer_kind(c.layers()[1]) == "relu");
  CHECK(layer_kind(c.layers()[2]) == "permutation");
  CHECK(layer_kind(c.layers()[6]) == "acdc");
  CHECK(count_params(c) == 3 * 3 * 8);
}

TEST_CASE("domain mismatches are rejected") {
  Cascade acdc = make_acdc_cascade(4, 2);
  Cascade afdf = make_afdf_cascade(4, 2);
  CHECK_THROWS_AS(acdc.apply(ComplexMatrix(1, 4)), UnsupportedError);
  CHECK_THROWS_AS(afdf.apply(Matrix(1, 4)), UnsupportedError);
  CHECK(afdf.is_complex());
  CHECK_THROWS_AS(optical_presentation(acdc), UnsupportedError);
}

TEST_CASE("AFDF cascade: first A is frozen identity, params counted as 4N per layer") {
  const Cascade c = make_afdf_cascade(8, 3);
  const auto& first = std::get<AfdfLayer>(c.layers()[0]);
  CHECK_FALSE(first.trainable_a());
  CHECK(first.a_is_identity());
  CHECK(std::get<AfdfLayer>(c.layers()[1]).trainable_a());
  CHECK(count_params(c) == 3 * 4 * 8);
}

TEST_CASE("complex cascade equals its materialized matrix") {
  Rng rng(2);
  for (std::size_t k : {1, 3, 8}) {
    const Cascade c = random_afdf(8, k, 7 + k);
    const ComplexMatrix x = random_complex(rng, 4, 8);
    CHECK(max_abs_diff(c.apply(x), matmul(x, materialize_complex(c))) < 1e-10);
  }
}

TEST_CASE("optical presentation reassembles to the materialized operator") {
  for (std::size_t k : {1, 2, 5, 8}) {
    for (std::size_t n : {4, 8, 16}) {
      const Cascade c = random_afdf(n, k, 31 * k + n);
      const OpticalPresentation op = optical_presentation(c);
      CHECK(max_abs_diff(op.reassemble(), materialize_complex(c)) < 1e-9);
      // A frozen identity A_1 contributes no circulant factor.
      std::size_t circulants = 0;
      for (const auto& f : op.factors) {
        if (f.kind == OpticalFactor::Kind::circulant) {
          ++circulants;
          CHECK(circulant_defect(f.matrix) < 1e-10);
        }
      }
      CHECK(circulants == k - 1);
    }
  }
}

TEST_CASE("circulant_defect detects non-circulant matrices") {
  ComplexMatrix m = ComplexMatrix::identity(4);
  CHECK(circulant_defect(m) == 0.0);
  m.re(0, 1) = 1.0;
  CHECK(circulant_defect(m) > 0.5);
}

TEST_CASE("save and load round-trip every layer kind bit-exactly") {
  Cascade c(99);
  Rng rng(3);
  c.add(AcdcLayer(8, DctMode::naive));
  c.add(ReluLayer(8));
  c.add(random_permutation(8, rng));
  c.add(AcdcLayer(8));
  c.add(DenseLayer(8, 3));
  initialize(c, InitScheme::identity_noise(0.1), rng);
  for (auto& p : c.params()) {
    for (auto& v : p.value) v += rng.gaussian(0.0, 1e-3);
  }
  std::stringstream ss;
  save_cascade(c, ss);
  const Cascade back = load_cascade(ss);
  CHECK(back.seed() == 99);
  REQUIRE(back.depth() == c.depth());
  const Matrix x = rand_gaussian(rng, 2, 8, 0.0, 1.0);
  CHECK(max_abs_diff(back.apply(x), c.apply(x)) == 0.0);
  CHECK(std::get<AcdcLayer>(back.layers()[0]).dct_mode() == DctMode::naive);

  Cascade a = random_afdf(4, 3, 1);
  std::stringstream sa;
  save_cascade(a, sa);
  const Cascade aback = load_cascade(sa);
  const ComplexMatrix z = random_complex(rng, 2, 4);
  CHECK(max_abs_diff(aback.apply(z), a.apply(z)) == 0.0);
  CHECK_FALSE(std::get<AfdfLayer>(aback.layers()[0]).trainable_a());
}

TEST_CASE("load rejects malformed input") {
  std::stringstream bad1("not-a-cascade 1\n");
  CHECK_THROWS(load_cascade(bad1));
  std::stringstream bad2("sell-cascade 99\n");
  CHECK_THROWS(load_cascade(bad2));
  std::stringstream bad3("sell-cascade 1\nseed 1\nlayers 1\nacdc 2 fast\na 1 x\n");
  CHECK_THROWS(load_cascade(bad3));
}
