#pragma once

// Reference implementations used only by tests. Deliberately naive and
// independent from the library code paths they check.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sell/tensor.hpp"

namespace oracle {

using cd = std::complex<double>;
using CMat = std::vector<std::vector<cd>>;

inline sell::Matrix matmul(const sell::Matrix& a, const sell::Matrix& b) {
  sell::Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  }
  return c;
}

/// Orthonormal DCT-II matrix straight from the cosine formula, long double.
inline sell::Matrix dct_matrix(std::size_t n) {
  sell::Matrix c(n, n);
  const long double pi = std::numbers::pi_v<long double>;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const long double eps = k == 0 ? 1.0L / std::sqrt(2.0L) : 1.0L;
      c(i, k) = static_cast<double>(std::sqrt(2.0L / n) * eps *
                                    std::cos(pi * (2.0L * i + 1.0L) * k / (2.0L * n)));
    }
  }
  return c;
}

/// out_k = sum_n x_n c_nk, evaluated term by term.
inline std::vector<double> dct(const std::vector<double>& x) {
  const auto c = dct_matrix(x.size());
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * c(i, k);
    out[k] = static_cast<double>(s);
  }
  return out;
}

/// Unnormalized DFT X_k = sum_n x_n exp(-2 pi i n k / N); inverse scales by 1/N.
inline std::vector<cd> dft(const std::vector<cd>& x, bool inverse = false) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                         static_cast<double>(n);
      s += x[j] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = inverse ? s / static_cast<double>(n) : s;
  }
  return out;
}

inline CMat to_cmat(const sell::ComplexMatrix& m) {
  CMat out(m.rows(), std::vector<cd>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = {m.re(i, j), m.im(i, j)};
  }
  return out;
}

inline CMat cmatmul(const CMat& a, const CMat& b) {
  CMat c(a.size(), std::vector<cd>(b[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      cd s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  }
  return c;
}

inline double max_abs_diff(const CMat& a, const CMat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  }
  return m;
}

}  // namespace oracle
