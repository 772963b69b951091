#include <doctest.h>

#include <complex>

#include "oracles.hpp"
#include "sell/errors.hpp"
#include "sell/layers.hpp"
#include "sell/rng.hpp"

using namespace sell;

namespace {

void randomize(std::vector<double>& v, Rng& rng, double mean = 0.0) {
  for (auto& x : v) x = rng.gaussian(mean, 0.5);
}

}  // namespace

TEST_CASE("ACDC forward is x diag(a) C diag(d) C^T plus the routed bias") {
  Rng rng(21);
  for (std::size_t n : {4, 6, 16}) {
    AcdcLayer layer(n);
    randomize(layer.a(), rng, 1.0);
    randomize(layer.d(), rng, 1.0);
    randomize(layer.bias(), rng);
    const Matrix x = rand_gaussian(rng, 3, n, 0.0, 1.0);

    const Matrix c = oracle::dct_matrix(n);
    Matrix da(n, n), dd(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      da(i, i) = layer.a()[i];
      dd(i, i) = layer.d()[i];
    }
    const Matrix w = oracle::matmul(oracle::matmul(oracle::matmul(da, c), dd), transpose(c));
    const Matrix bias_row = oracle::matmul(Matrix::row_vector(layer.bias()), transpose(c));
    Matrix expected = oracle::matmul(x, w);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t j = 0; j < n; ++j) expected(r, j) += bias_row(0, j);
    }
    CHECK(max_abs_diff(layer.forward(x), expected) < 1e-12);
    CHECK(max_abs_diff(layer.apply(x), expected) < 1e-12);
    CHECK(max_abs_diff(layer.apply(x, true, 3), expected) < 1e-12);
  }
}

TEST_CASE("ACDC with unit diagonals and zero bias is the identity") {
  AcdcLayer layer(8);
  Rng rng(1);
  const Matrix x = rand_gaussian(rng, 2, 8, 0.0, 1.0);
  CHECK(max_abs_diff(layer.apply(x), x) < 1e-13);
  CHECK(layer.param_count() == 24);
}

TEST_CASE("naive and fast ACDC agree") {
  Rng rng(2);
  AcdcLayer fast(32, DctMode::fast), naive(32, DctMode::naive);
  randomize(fast.a(), rng, 1.0);
  randomize(fast.d(), rng, 1.0);
  randomize(fast.bias(), rng);
  naive.a() = fast.a();
  naive.d() = fast.d();
  naive.bias() = fast.bias();
  const Matrix x = rand_gaussian(rng, 4, 32, 0.0, 1.0);
  CHECK(max_abs_diff(fast.apply(x), naive.apply(x)) < 1e-12);
}

TEST_CASE("backward requires a cached forward and a matching batch") {
  AcdcLayer acdc(4);
  CHECK_THROWS_AS(acdc.backward(Matrix(1, 4)), StateError);
  acdc.forward(Matrix(2, 4, 1.0));
  CHECK_THROWS_AS(acdc.backward(Matrix(3, 4)), DimensionError);
  CHECK_THROWS_AS(acdc.forward(Matrix(1, 5)), DimensionError);
  acdc.clear_cache();
  CHECK_THROWS_AS(acdc.backward(Matrix(2, 4)), StateError);

  AfdfLayer afdf(4);
  CHECK_THROWS_AS(afdf.backward(ComplexMatrix(1, 4)), StateError);
  ReluLayer relu(4);
  CHECK_THROWS_AS(relu.backward(Matrix(1, 4)), StateError);
  DenseLayer dense(4, 2);
  CHECK_THROWS_AS(dense.backward(Matrix(1, 2)), StateError);
}

TEST_CASE("gradients accumulate until zero_grad") {
  Rng rng(3);
  AcdcLayer layer(8);
  const Matrix x = rand_gaussian(rng, 2, 8, 0.0, 1.0);
  const Matrix g = rand_gaussian(rng, 2, 8, 0.0, 1.0);
  layer.forward(x);
  layer.backward(g);
  const auto once = layer.grad_a();
  layer.forward(x);
  layer.backward(g);
  for (std::size_t i = 0; i < 8; ++i) CHECK(layer.grad_a()[i] == doctest::Approx(2.0 * once[i]));
  layer.zero_grad();
  for (double v : layer.grad_a()) CHECK(v == 0.0);
}

TEST_CASE("AFDF forward equals x diag(a) F diag(d) F^-1") {
  Rng rng(4);
  const std::size_t n = 8;
  AfdfLayer layer(n);
  randomize(layer.a_re(), rng, 1.0);
  randomize(layer.a_im(), rng);
  randomize(layer.d_re(), rng, 1.0);
  randomize(layer.d_im(), rng);
  const ComplexMatrix x{rand_gaussian(rng, 2, n, 0.0, 1.0), rand_gaussian(rng, 2, n, 0.0, 1.0)};

  std::vector<oracle::cd> a(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = {layer.a_re()[i], layer.a_im()[i]};
    d[i] = {layer.d_re()[i], layer.d_im()[i]};
  }
  const ComplexMatrix y = layer.apply(x);
  for (std::size_t r = 0; r < 2; ++r) {
    std::vector<oracle::cd> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = oracle::cd(x.re(r, i), x.im(r, i)) * a[i];
    auto f = oracle::dft(h);
    for (std::size_t i = 0; i < n; ++i) f[i] *= d[i];
    const auto out = oracle::dft(f, true);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(out[i] - oracle::cd(y.re(r, i), y.im(r, i))) < 1e-12);
    }
  }
  CHECK(layer.param_count() == 32);
  CHECK_FALSE(layer.a_is_identity());
  CHECK(AfdfLayer(4).a_is_identity());
}

TEST_CASE("frozen AFDF a receives no gradient and is excluded from params") {
  AfdfLayer layer(4);
  layer.set_trainable_a(false);
  for (const auto& p : layer.params()) CHECK(p.group != ParamGroup::diag_a);
  const ComplexMatrix x{Matrix(1, 4, 1.0), Matrix(1, 4, 0.5)};
  layer.forward(x);
  layer.backward(x);
  for (double v : layer.grad_a_re()) CHECK(v == 0.0);
}

TEST_CASE("ReLU masks negative inputs in both directions") {
  ReluLayer relu(4);
  const Matrix y = relu.forward(Matrix{{-1, 0.5, 2, -3}});
  CHECK(y == Matrix{{0, 0.5, 2, 0}});
  CHECK(relu.backward(Matrix{{1, 1, 1, 1}}) == Matrix{{0, 1, 1, 0}});
}

TEST_CASE("permutation routes values forward and gradients back") {
  const PermutationLayer p({2, 0, 3, 1});
  const Matrix x{{10, 11, 12, 13}};
  const Matrix y = p.forward(x);
  CHECK(y == Matrix{{12, 10, 13, 11}});
  CHECK(p.backward(y) == x);
  const ComplexMatrix cx{x, scale(x, -1.0)};
  CHECK(max_abs_diff(p.backward(p.forward(cx)), cx) == 0.0);
  CHECK_THROWS_AS(PermutationLayer({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(PermutationLayer({0, 3}), std::invalid_argument);
  CHECK(PermutationLayer::identity(3).forward(Matrix{{1, 2, 3}}) == Matrix{{1, 2, 3}});
}

TEST_CASE("dense layer computes x W + b") {
  DenseLayer layer(2, 3);
  layer.weight() = Matrix{{1, 2, 3}, {4, 5, 6}};
  layer.bias() = {1, 0, -1};
  CHECK(layer.apply(Matrix{{1, 1}}) == Matrix{{6, 7, 8}});
  CHECK(layer.apply(Matrix{{1, 1}}, false) == Matrix{{5, 7, 9}});
  CHECK(layer.param_count() == 9);
  layer.forward(Matrix{{1, 2}});
  const Matrix gx = layer.backward(Matrix{{1, 0, 0}});
  CHECK(gx == Matrix{{1, 4}});
  CHECK(layer.grad_weight() == Matrix{{1, 0, 0}, {2, 0, 0}});
}

TEST_CASE("param views expose groups") {
  AcdcLayer layer(4);
  const auto ps = layer.params();
  REQUIRE(ps.size() == 3);
  CHECK(ps[0].group == ParamGroup::diag_a);
  CHECK(ps[1].group == ParamGroup::diag_d);
  CHECK(ps[2].group == ParamGroup::bias);
  CHECK(to_string(ParamGroup::weight) == "weight");
}
