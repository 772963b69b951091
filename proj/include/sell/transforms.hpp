#pragma once

// Orthonormal DCT-II / DCT-III and a radix-2 complex FFT.
//
// Conventions (row vectors, as used by the layers):
//   dct(x)_k  = sum_n x_n c_nk,  c_nk = sqrt(2/N) eps_k cos(pi (2n+1) k / 2N),
//               eps_0 = 1/sqrt(2), eps_k = 1 otherwise
//   idct      = transpose of dct (the matrix is orthogonal)
//   fft(x)_k  = sum_n x_n exp(-2 pi i n k / N)      (unnormalized)
//   ifft(X)_n = (1/N) sum_k X_k exp(+2 pi i n k / N)

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sell/tensor.hpp"

namespace sell {

bool is_power_of_two(std::size_t n) noexcept;

class FftPlan {
 public:
  /// Throws UnsupportedError unless n is a power of two.
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// In-place transforms on one split-complex vector of length size().
  void forward(std::span<double> re, std::span<double> im) const;
  void inverse(std::span<double> re, std::span<double> im) const;

 private:
  void transform(std::span<double> re, std::span<double> im, bool inverse) const;

  std::size_t n_;
  std::vector<std::uint32_t> bitrev_;
  std::vector<double> cos_;  // cos(2 pi k / n), k < n/2
  std::vector<double> sin_;  // sin(2 pi k / n), k < n/2
};

enum class DctMode { naive, fast };

/// Fast when n is a power of two, naive otherwise.
DctMode default_dct_mode(std::size_t n) noexcept;

class DctPlan {
 public:
  /// Fast mode throws UnsupportedError for non-power-of-two n.
  DctPlan(std::size_t n, DctMode mode);

  std::size_t size() const noexcept { return n_; }
  DctMode mode() const noexcept { return mode_; }

  /// The N x N cosine matrix c_nk (built on demand for fast plans).
  Matrix cosine_matrix() const;

  /// Single-row transforms; `in` and `out` must not alias. `scratch` is
  /// resized as needed and may be reused across calls on the same thread.
  void forward_row(std::span<const double> in, std::span<double> out,
                   std::vector<double>& scratch) const;
  void inverse_row(std::span<const double> in, std::span<double> out,
                   std::vector<double>& scratch) const;

  // Makhoul's algorithm: even/odd reorder, one size-N complex FFT, twiddle.
  void makhoul_forward_row(std::span<const double> in, std::span<double> out,
                           std::vector<double>& scratch) const;
  void makhoul_inverse_row(std::span<const double> in, std::span<double> out,
                           std::vector<double>& scratch) const;

 private:
  std::size_t n_;
  DctMode mode_;
  std::vector<double> cosine_;  // naive: row-major c_nk
  std::unique_ptr<FftPlan> fft_;
  std::vector<double> tw_cos_;  // cos(pi k / 2N)
  std::vector<double> tw_sin_;  // sin(pi k / 2N)
  std::vector<double> norm_;    // sqrt(2/N) eps_k
};

/// Process-wide cache of immutable plans keyed by (n, mode).
std::shared_ptr<const DctPlan> shared_dct_plan(std::size_t n, DctMode mode);
std::shared_ptr<const FftPlan> shared_fft_plan(std::size_t n);

Matrix dct(const DctPlan& plan, const Matrix& x);
Matrix idct(const DctPlan& plan, const Matrix& x);
/// Requires a fast plan. Same result as dct() on a naive plan.
Matrix fast_dct_makhoul(const DctPlan& plan, const Matrix& x);
Matrix fast_idct_makhoul(const DctPlan& plan, const Matrix& x);

ComplexMatrix fft(const FftPlan& plan, const ComplexMatrix& x);
ComplexMatrix ifft(const FftPlan& plan, const ComplexMatrix& x);

/// Dense DFT matrix F with F[n][k] = exp(-2 pi i n k / N) so that x * F == fft(x)
/// for a row vector x; with `inverse` the matrix of ifft.
ComplexMatrix dft_matrix(std::size_t n, bool inverse = false);

}  // namespace sell
