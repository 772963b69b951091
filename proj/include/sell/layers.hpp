#pragma once

// ACDC / AFDF structured layers and the auxiliary layers they are composed
// with. All layers take row-vector batches (B x N) and follow the same
// training contract: forward() caches what backward() needs, backward()
// accumulates parameter gradients (summed over the batch) and returns the
// gradient with respect to the input.

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "sell/tensor.hpp"
#include "sell/transforms.hpp"

namespace sell {

/// Optimizer groups; SGD settings (lr multiplier, weight decay) are per group.
enum class ParamGroup { diag_a, diag_d, bias, weight };

std::string_view to_string(ParamGroup g) noexcept;

/// Non-owning handle on one parameter tensor and its gradient accumulator.
struct ParamView {
  std::string_view name;
  ParamGroup group;
  std::span<double> value;
  std::span<double> grad;
};

/// Real structured layer A C D C^-1 with a bias on the D stage:
///   y = idct( dct(x * a) * d + bias )
class AcdcLayer {
 public:
  explicit AcdcLayer(std::size_t n) : AcdcLayer(n, default_dct_mode(n)) {}
  AcdcLayer(std::size_t n, DctMode mode);

  std::size_t size() const noexcept { return n_; }
  std::size_t param_count() const noexcept { return 3 * n_; }
  DctMode dct_mode() const noexcept { return plan_->mode(); }

  std::vector<double>& a() noexcept { return a_; }
  std::vector<double>& d() noexcept { return d_; }
  std::vector<double>& bias() noexcept { return bias_; }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& d() const noexcept { return d_; }
  const std::vector<double>& bias() const noexcept { return bias_; }
  const std::vector<double>& grad_a() const noexcept { return grad_a_; }
  const std::vector<double>& grad_d() const noexcept { return grad_d_; }
  const std::vector<double>& grad_bias() const noexcept { return grad_bias_; }

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_y);
  /// Stateless evaluation; `threads` > 1 splits the batch rows.
  Matrix apply(const Matrix& x, bool with_bias = true, std::size_t threads = 1) const;

  std::vector<ParamView> params();
  void zero_grad();
  void clear_cache();

 private:
  std::size_t n_;
  std::shared_ptr<const DctPlan> plan_;
  std::vector<double> a_, d_, bias_;
  std::vector<double> grad_a_, grad_d_, grad_bias_;
  Matrix cached_x_;
  Matrix cached_h2_;
  bool has_cache_ = false;
};

/// Complex counterpart y = ifft( fft(x * a) * d ) with complex diagonals.
/// Gradients are taken with respect to the real and imaginary parts of a
/// and d separately.
class AfdfLayer {
 public:
  explicit AfdfLayer(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t param_count() const noexcept { return 4 * n_; }

  /// When false, a is held fixed (used for A_1 = I in a cascade).
  bool trainable_a() const noexcept { return trainable_a_; }
  void set_trainable_a(bool v) noexcept { trainable_a_ = v; }

  std::vector<double>& a_re() noexcept { return a_re_; }
  std::vector<double>& a_im() noexcept { return a_im_; }
  std::vector<double>& d_re() noexcept { return d_re_; }
  std::vector<double>& d_im() noexcept { return d_im_; }
  const std::vector<double>& a_re() const noexcept { return a_re_; }
  const std::vector<double>& a_im() const noexcept { return a_im_; }
  const std::vector<double>& d_re() const noexcept { return d_re_; }
  const std::vector<double>& d_im() const noexcept { return d_im_; }
  const std::vector<double>& grad_a_re() const noexcept { return grad_a_re_; }
  const std::vector<double>& grad_a_im() const noexcept { return grad_a_im_; }
  const std::vector<double>& grad_d_re() const noexcept { return grad_d_re_; }
  const std::vector<double>& grad_d_im() const noexcept { return grad_d_im_; }

  bool a_is_identity() const;

  ComplexMatrix forward(const ComplexMatrix& x);
  /// grad_y holds dL/dRe(y) in re and dL/dIm(y) in im; same layout returned.
  ComplexMatrix backward(const ComplexMatrix& grad_y);
  ComplexMatrix apply(const ComplexMatrix& x) const;

  std::vector<ParamView> params();
  void zero_grad();
  void clear_cache();

 private:
  std::size_t n_;
  std::shared_ptr<const FftPlan> plan_;
  bool trainable_a_ = true;
  std::vector<double> a_re_, a_im_, d_re_, d_im_;
  std::vector<double> grad_a_re_, grad_a_im_, grad_d_re_, grad_d_im_;
  ComplexMatrix cached_x_;
  ComplexMatrix cached_h2_;
  bool has_cache_ = false;
};

class ReluLayer {
 public:
  explicit ReluLayer(std::size_t n) : n_(n) {}

  std::size_t size() const noexcept { return n_; }

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_y);
  Matrix apply(const Matrix& x) const;
  void clear_cache();

 private:
  std::size_t n_;
  Matrix mask_;
  bool has_cache_ = false;
};

/// Fixed permutation y[j] = x[perm[j]]. Works on real and complex signals.
class PermutationLayer {
 public:
  explicit PermutationLayer(std::vector<std::size_t> perm);

  static PermutationLayer identity(std::size_t n);

  std::size_t size() const noexcept { return perm_.size(); }
  const std::vector<std::size_t>& perm() const noexcept { return perm_; }
  const std::vector<std::size_t>& inverse() const noexcept { return inverse_; }

  Matrix forward(const Matrix& x) const;
  /// Routes each gradient entry back to the input position it came from.
  Matrix backward(const Matrix& grad_y) const;
  ComplexMatrix forward(const ComplexMatrix& x) const;
  ComplexMatrix backward(const ComplexMatrix& grad_y) const;

 private:
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> inverse_;
};

/// Dense affine baseline y = x W + b with W of shape in x out.
class DenseLayer {
 public:
  DenseLayer(std::size_t in, std::size_t out);

  std::size_t in_size() const noexcept { return weight_.rows(); }
  std::size_t out_size() const noexcept { return weight_.cols(); }
  std::size_t param_count() const noexcept { return weight_.size() + bias_.size(); }

  Matrix& weight() noexcept { return weight_; }
  const Matrix& weight() const noexcept { return weight_; }
  std::vector<double>& bias() noexcept { return bias_; }
  const std::vector<double>& bias() const noexcept { return bias_; }
  const Matrix& grad_weight() const noexcept { return grad_weight_; }
  const std::vector<double>& grad_bias() const noexcept { return grad_bias_; }

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_y);
  Matrix apply(const Matrix& x, bool with_bias = true, std::size_t threads = 1) const;

  std::vector<ParamView> params();
  void zero_grad();
  void clear_cache();

 private:
  Matrix weight_;
  std::vector<double> bias_;
  Matrix grad_weight_;
  std::vector<double> grad_bias_;
  Matrix cached_x_;
  bool has_cache_ = false;
};

}  // namespace sell
