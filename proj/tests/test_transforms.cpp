#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sell/errors.hpp"
#include "sell/rng.hpp"
#include "sell/transforms.hpp"

using namespace sell;

namespace {

Matrix row(const std::vector<double>& v) { return Matrix::row_vector(v); }

}  // namespace

TEST_CASE("cosine matrix matches the closed form and is orthonormal") {
  for (std::size_t n : {1, 2, 3, 4, 5, 8, 12, 32}) {
    const DctPlan plan(n, DctMode::naive);
    const Matrix c = plan.cosine_matrix();
    CHECK(max_abs_diff(c, oracle::dct_matrix(n)) < 1e-14);
    CHECK(max_abs_diff(oracle::matmul(c, transpose(c)), Matrix::identity(n)) < 1e-13);
  }
}

TEST_CASE("DCT of a constant vector is a scaled DC coefficient") {
  const std::size_t n = 8;
  const DctPlan plan(n, DctMode::naive);
  const Matrix y = dct(plan, row(std::vector<double>(n, 1.0)));
  CHECK(y(0, 0) == doctest::Approx(std::sqrt(double(n))));
  for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(y(0, k)) < 1e-14);
}

TEST_CASE("naive and fast DCT agree with the direct formula") {
  Rng rng(9);
  for (std::size_t n = 2; n <= 256; n *= 2) {
    const DctPlan naive(n, DctMode::naive);
    const DctPlan fast(n, DctMode::fast);
    for (int t = 0; t < 5; ++t) {
      const Matrix x = rand_gaussian(rng, 1, n, 0.0, 1.0);
      const std::vector<double> xv(x.values().begin(), x.values().end());
      const Matrix ref = row(oracle::dct(xv));
      CHECK(max_abs_diff(dct(naive, x), ref) < 1e-12);
      CHECK(max_abs_diff(dct(fast, x), ref) < 1e-12);
      CHECK(max_abs_diff(fast_dct_makhoul(fast, x), ref) < 1e-12);
    }
  }
}

TEST_CASE("idct inverts dct on both paths") {
  Rng rng(10);
  for (std::size_t n : {1, 2, 4, 16, 64}) {
    for (auto mode : {DctMode::naive, DctMode::fast}) {
      const DctPlan plan(n, mode);
      const Matrix x = rand_gaussian(rng, 3, n, 0.0, 1.0);
      CHECK(max_abs_diff(idct(plan, dct(plan, x)), x) < 1e-12);
      CHECK(max_abs_diff(dct(plan, idct(plan, x)), x) < 1e-12);
    }
    const DctPlan fast(n, DctMode::fast);
    const Matrix x = rand_gaussian(rng, 2, n, 0.0, 1.0);
    CHECK(max_abs_diff(fast_idct_makhoul(fast, fast_dct_makhoul(fast, x)), x) < 1e-12);
  }
}

TEST_CASE("idct equals multiplication by the transposed cosine matrix") {
  Rng rng(12);
  const std::size_t n = 16;
  const DctPlan fast(n, DctMode::fast);
  const Matrix x = rand_gaussian(rng, 2, n, 0.0, 1.0);
  CHECK(max_abs_diff(idct(fast, x), oracle::matmul(x, transpose(oracle::dct_matrix(n)))) < 1e-12);
}

TEST_CASE("fast paths reject non-power-of-two sizes") {
  CHECK_THROWS_AS(DctPlan(12, DctMode::fast), UnsupportedError);
  CHECK_THROWS_AS(FftPlan(6), UnsupportedError);
  CHECK(default_dct_mode(12) == DctMode::naive);
  CHECK(default_dct_mode(16) == DctMode::fast);
  CHECK(is_power_of_two(1));
  CHECK_FALSE(is_power_of_two(0));
}

TEST_CASE("FFT matches the naive DFT and inverts") {
  Rng rng(13);
  for (std::size_t n = 1; n <= 128; n *= 2) {
    const FftPlan plan(n);
    const ComplexMatrix x{rand_gaussian(rng, 1, n, 0.0, 1.0), rand_gaussian(rng, 1, n, 0.0, 1.0)};
    std::vector<oracle::cd> xv(n);
    for (std::size_t i = 0; i < n; ++i) xv[i] = {x.re(0, i), x.im(0, i)};
    const auto ref = oracle::dft(xv);
    const ComplexMatrix y = fft(plan, x);
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(oracle::cd(y.re(0, k), y.im(0, k)) - ref[k]));
    CHECK(err < 1e-11);
    CHECK(max_abs_diff(ifft(plan, y), x) < 1e-13);
  }
}

TEST_CASE("dft_matrix has the sign convention of the forward transform") {
  const std::size_t n = 8;
  const ComplexMatrix f = dft_matrix(n);
  const ComplexMatrix fi = dft_matrix(n, true);
  CHECK(f.im(1, 1) == doctest::Approx(-std::sin(2.0 * std::numbers::pi / n)));
  CHECK(max_abs_diff(matmul(f, fi), ComplexMatrix::identity(n)) < 1e-13);
  // x F equals fft(x) for a row vector x.
  Rng rng(1);
  const ComplexMatrix x{rand_gaussian(rng, 1, n, 0.0, 1.0), rand_gaussian(rng, 1, n, 0.0, 1.0)};
  CHECK(max_abs_diff(matmul(x, f), fft(FftPlan(n), x)) < 1e-12);
}

TEST_CASE("shared plans are cached") {
  CHECK(shared_dct_plan(32, DctMode::fast) == shared_dct_plan(32, DctMode::fast));
  CHECK(shared_fft_plan(64) == shared_fft_plan(64));
}
