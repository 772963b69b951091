#include <doctest.h>

#include "oracles.hpp"
#include "sell/errors.hpp"
#include "sell/rng.hpp"
#include "sell/tensor.hpp"

using namespace sell;

TEST_CASE("matmul agrees with the triple loop") {
  Rng rng(11);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {3, 5, 2}, {7, 7, 7}, {16, 3, 9}}) {
    const Matrix a = rand_gaussian(rng, m, k, 0.0, 1.0);
    const Matrix b = rand_gaussian(rng, k, n, 0.0, 1.0);
    CHECK(max_abs_diff(matmul(a, b), oracle::matmul(a, b)) < 1e-12);
  }
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(add(Matrix(2, 3), Matrix(3, 2)), DimensionError);
}

TEST_CASE("complex matmul against std::complex") {
  Rng rng(3);
  const ComplexMatrix a{rand_gaussian(rng, 4, 3, 0.0, 1.0), rand_gaussian(rng, 4, 3, 0.0, 1.0)};
  const ComplexMatrix b{rand_gaussian(rng, 3, 5, 0.0, 1.0), rand_gaussian(rng, 3, 5, 0.0, 1.0)};
  const auto ref = oracle::cmatmul(oracle::to_cmat(a), oracle::to_cmat(b));
  CHECK(oracle::max_abs_diff(oracle::to_cmat(matmul(a, b)), ref) < 1e-12);
}

TEST_CASE("elementwise_mul broadcasts a row vector") {
  const Matrix x{{1, 2, 3}, {4, 5, 6}};
  const Matrix r{{10, 0, -1}};
  const Matrix y = elementwise_mul(x, r);
  CHECK(y == Matrix{{10, 0, -3}, {40, 0, -6}});
  CHECK_THROWS_AS(elementwise_mul(x, Matrix{{1, 2}}), DimensionError);
}

TEST_CASE("transpose, identity and norms") {
  const Matrix x{{1, 2}, {3, 4}, {5, 6}};
  CHECK(transpose(transpose(x)) == x);
  CHECK(transpose(x)(1, 2) == 6.0);
  CHECK(matmul(Matrix::identity(3), x) == x);
  CHECK(max_abs(x) == 6.0);
  CHECK(frobenius_norm(Matrix{{3, 4}}) == doctest::Approx(5.0));
  CHECK(scale(x, 2.0)(2, 1) == 12.0);
  CHECK(subtract(x, x) == Matrix(3, 2));
}

TEST_CASE("parallel_rows visits every row exactly once") {
  for (std::size_t threads : {1, 2, 3, 8}) {
    std::vector<int> seen(37, 0);
    parallel_rows(seen.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) ++seen[r];
    });
    for (int s : seen) CHECK(s == 1);
  }
}
