#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "sell/cascade.hpp"
#include "sell/layers.hpp"
#include "sell/rng.hpp"
#include "sell/tensor.hpp"

namespace sell {

// -- Losses -------------------------------------------------------------------

struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

/// Mean over all entries of (pred - target)^2; grad = 2 (pred - target) / count.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

struct ComplexLossResult {
  double loss = 0.0;
  ComplexMatrix grad;  // dL/dRe in re, dL/dIm in im
};

/// Mean over entries of |pred - target|^2.
ComplexLossResult complex_mse_loss(const ComplexMatrix& pred, const ComplexMatrix& target);

/// Mean softmax cross-entropy; `target` is one-hot (B x classes).
LossResult softmax_cross_entropy(const Matrix& logits, const Matrix& target);

/// Fraction of rows whose argmax matches the one-hot target.
double accuracy(const Matrix& logits, const Matrix& target);

// -- SGD ----------------------------------------------------------------------

inline constexpr std::size_t kParamGroupCount = 4;

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;
  double weight_decay = 0.0;
  double lr_decay_factor = 1.0;
  /// Steps between lr decays; 0 disables the schedule.
  std::size_t lr_decay_every = 0;
  /// Indexed by ParamGroup.
  std::array<double, kParamGroupCount> lr_multiplier{1.0, 1.0, 1.0, 1.0};
  /// Groups excluded from weight decay; diagonals are excluded by default.
  std::array<bool, kParamGroupCount> no_weight_decay{true, true, false, false};

  /// lr * factor^floor(step / every) * multiplier[group]
  double effective_lr(std::size_t step, ParamGroup group) const;
  double decay_for(ParamGroup group) const;
};

/// Momentum buffers, one per parameter tensor in params() order.
struct SgdState {
  std::vector<std::vector<double>> velocity;
};

/// v <- momentum v - lr_eff (g + wd p);  p <- p + v;  g <- 0.
void sgd_step(std::span<const ParamView> params, SgdState& state, const SgdConfig& config,
              std::size_t step);

// -- Initialization -----------------------------------------------------------

struct InitScheme {
  enum class Kind { diag_identity_noise, diag_zero_mean, dense_glorot };
  Kind kind = Kind::diag_identity_noise;
  double sigma = 0.1;

  static InitScheme identity_noise(double sigma) { return {Kind::diag_identity_noise, sigma}; }
  static InitScheme zero_mean(double sigma) { return {Kind::diag_zero_mean, sigma}; }
  static InitScheme glorot() { return {Kind::dense_glorot, 0.0}; }
};

/// Diagonals (ACDC a, d; AFDF real parts) ~ N(1, sigma^2) or N(0, sigma^2),
/// AFDF imaginary parts ~ N(0, sigma^2), biases 0, dense weights Glorot
/// uniform. A frozen AFDF `a` is left untouched. Under dense_glorot the
/// diagonals get the Glorot uniform range of an N x N layer.
void initialize(Cascade& cascade, const InitScheme& scheme, Rng& rng);

// -- Data -----------------------------------------------------------------------

struct RegressionDataset {
  Matrix x;
  Matrix y;
  Matrix w_true;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

/// X, W_true ~ U[0,1); Y = X W_true + N(0, noise_std^2).
RegressionDataset make_regression(std::uint64_t seed, std::size_t n_samples = 10000,
                                  std::size_t n_in = 32, std::size_t n_out = 32,
                                  double noise_std = 1e-2);

/// Ordinary least squares W minimizing ||X W - Y||_F (normal equations,
/// Cholesky). Used as the attainable-floor oracle for regression runs.
Matrix least_squares(const Matrix& x, const Matrix& y);

// -- Training loop ---------------------------------------------------------------

struct TrainOptions {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  /// Governs the per-epoch shuffling stream.
  std::uint64_t seed = 0;
  /// Called after each epoch with the epoch index and its mean loss.
  std::function<void(std::size_t, double)> on_epoch_end;
};

using LossFn = std::function<LossResult(const Matrix& pred, const Matrix& target)>;

/// Minibatch SGD over shuffled rows; returns the mean training loss of each
/// epoch. Throws DivergenceError (with the global step index) on a
/// non-finite loss.
std::vector<double> train(Cascade& cascade, const Matrix& x, const Matrix& y, const LossFn& loss,
                          const SgdConfig& sgd, const TrainOptions& options);

/// MSE regression on a RegressionDataset.
std::vector<double> train(Cascade& cascade, const RegressionDataset& data, const SgdConfig& sgd,
                          const TrainOptions& options);

/// Complex-domain variant (AFDF cascades) with complex_mse_loss.
std::vector<double> train_complex(Cascade& cascade, const ComplexMatrix& x,
                                  const ComplexMatrix& y, const SgdConfig& sgd,
                                  const TrainOptions& options);

/// Row order for one epoch: a Fisher-Yates shuffle drawn from `rng`.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace sell
