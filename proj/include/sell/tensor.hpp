#pragma once

// Dense row-major matrices used as the numeric substrate for every layer,
// transform and experiment. float64 throughout.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace sell {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix row_vector(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Complex matrix in split layout: separate real and imaginary planes.
struct ComplexMatrix {
  Matrix re;
  Matrix im;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : re(rows, cols), im(rows, cols) {}
  ComplexMatrix(Matrix real, Matrix imag);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return re.rows(); }
  std::size_t cols() const noexcept { return re.cols(); }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;
};

/// out[i,j] = u[i,j] * v[i,j], or v[0,j] when v is a 1xN row broadcast over u.
Matrix elementwise_mul(const Matrix& u, const Matrix& v);
Matrix matmul(const Matrix& a, const Matrix& b);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double frobenius_norm(const Matrix& m);

/// Runs fn(begin, end) over contiguous row ranges on up to `threads` threads.
/// Rows are split in a fixed order so results never depend on scheduling.
void parallel_rows(std::size_t rows, std::size_t threads,
                   const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sell
