#include "sell/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sell/errors.hpp"

namespace sell {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": prediction and target shapes differ");
  }
}

std::size_t group_index(ParamGroup g) { return static_cast<std::size_t>(g); }

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(m.row(rows[i]).begin(), m.cols(), out.row(i).begin());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Losses

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "mse_loss");
  LossResult r{0.0, Matrix(pred.rows(), pred.cols())};
  const double count = static_cast<double>(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double diff = pred.values()[k] - target.values()[k];
    r.loss += diff * diff;
    r.grad.values()[k] = 2.0 * diff / count;
  }
  r.loss /= count;
  return r;
}

ComplexLossResult complex_mse_loss(const ComplexMatrix& pred, const ComplexMatrix& target) {
  require_same_shape(pred.re, target.re, "complex_mse_loss");
  const LossResult re = mse_loss(pred.re, target.re);
  const LossResult im = mse_loss(pred.im, target.im);
  return {re.loss + im.loss, ComplexMatrix(re.grad, im.grad)};
}

LossResult softmax_cross_entropy(const Matrix& logits, const Matrix& target) {
  require_same_shape(logits, target, "softmax_cross_entropy");
  LossResult r{0.0, Matrix(logits.rows(), logits.cols())};
  const double batch = static_cast<double>(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double log_sum = zmax + std::log(sum);
    auto g = r.grad.row(i);
    auto t = target.row(i);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double p = std::exp(z[j] - log_sum);
      r.loss -= t[j] * (z[j] - log_sum);
      g[j] = (p - t[j]) / batch;
    }
  }
  r.loss /= batch;
  return r;
}

double accuracy(const Matrix& logits, const Matrix& target) {
  require_same_shape(logits, target, "accuracy");
  if (logits.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    auto t = target.row(i);
    const auto pz = std::max_element(z.begin(), z.end()) - z.begin();
    const auto pt = std::max_element(t.begin(), t.end()) - t.begin();
    if (pz == pt) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

// ---------------------------------------------------------------------------
// SGD

double SgdConfig::effective_lr(std::size_t step, ParamGroup group) const {
  double lr = learning_rate;
  if (lr_decay_every > 0) {
    lr *= std::pow(lr_decay_factor, static_cast<double>(step / lr_decay_every));
  }
  return lr * lr_multiplier[group_index(group)];
}

double SgdConfig::decay_for(ParamGroup group) const {
  return no_weight_decay[group_index(group)] ? 0.0 : weight_decay;
}

void sgd_step(std::span<const ParamView> params, SgdState& state, const SgdConfig& config,
              std::size_t step) {
  if (state.velocity.size() != params.size()) {
    state.velocity.resize(params.size());
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    const ParamView& view = params[p];
    auto& v = state.velocity[p];
    if (v.size() != view.value.size()) v.assign(view.value.size(), 0.0);
    const double lr = config.effective_lr(step, view.group);
    const double wd = config.decay_for(view.group);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = config.momentum * v[i] - lr * (view.grad[i] + wd * view.value[i]);
      view.value[i] += v[i];
      view.grad[i] = 0.0;
    }
  }
}

// ---------------------------------------------------------------------------
// Initialization

void initialize(Cascade& cascade, const InitScheme& scheme, Rng& rng) {
  const auto draw_diag = [&](std::size_t n) {
    switch (scheme.kind) {
      case InitScheme::Kind::diag_identity_noise: return rng.gaussian(1.0, scheme.sigma);
      case InitScheme::Kind::diag_zero_mean: return rng.gaussian(0.0, scheme.sigma);
      case InitScheme::Kind::dense_glorot: {
        const double limit = std::sqrt(3.0 / static_cast<double>(n));
        return rng.uniform(-limit, limit);
      }
    }
    return 0.0;
  };
  const auto draw_imag = [&](std::size_t n) {
    if (scheme.kind == InitScheme::Kind::dense_glorot) {
      const double limit = std::sqrt(3.0 / static_cast<double>(n));
      return rng.uniform(-limit, limit);
    }
    return rng.gaussian(0.0, scheme.sigma);
  };
  for (auto& layer : cascade.layers()) {
    if (auto* l = std::get_if<AcdcLayer>(&layer)) {
      for (double& v : l->a()) v = draw_diag(l->size());
      for (double& v : l->d()) v = draw_diag(l->size());
      std::fill(l->bias().begin(), l->bias().end(), 0.0);
    } else if (auto* l = std::get_if<AfdfLayer>(&layer)) {
      if (l->trainable_a()) {
        for (double& v : l->a_re()) v = draw_diag(l->size());
        for (double& v : l->a_im()) v = draw_imag(l->size());
      }
      for (double& v : l->d_re()) v = draw_diag(l->size());
      for (double& v : l->d_im()) v = draw_imag(l->size());
    } else if (auto* l = std::get_if<DenseLayer>(&layer)) {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(l->in_size() + l->out_size()));
      for (double& v : l->weight().values()) v = rng.uniform(-limit, limit);
      std::fill(l->bias().begin(), l->bias().end(), 0.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Data

RegressionDataset make_regression(std::uint64_t seed, std::size_t n_samples, std::size_t n_in,
                                  std::size_t n_out, double noise_std) {
  if (n_samples == 0 || n_in == 0 || n_out == 0) {
    throw DimensionError("make_regression: dimensions must be positive");
  }
  Rng rng(seed);
  Rng x_rng = rng.split(1), w_rng = rng.split(2), noise_rng = rng.split(3);
  RegressionDataset data;
  data.seed = seed;
  data.noise_std = noise_std;
  data.x = rand_uniform(x_rng, n_samples, n_in, 0.0, 1.0);
  data.w_true = rand_uniform(w_rng, n_in, n_out, 0.0, 1.0);
  data.y = matmul(data.x, data.w_true);
  if (noise_std > 0.0) {
    for (double& v : data.y.values()) v += noise_rng.gaussian(0.0, noise_std);
  }
  return data;
}

Matrix least_squares(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw DimensionError("least_squares: row counts differ");
  const Matrix xt = transpose(x);
  Matrix g = matmul(xt, x);
  Matrix rhs = matmul(xt, y);
  const std::size_t n = g.rows();
  // Cholesky g = L L^T, stored in the lower triangle of g.
  for (std::size_t j = 0; j < n; ++j) {
    double diag = g(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= g(j, k) * g(j, k);
    if (diag <= 0.0) throw std::runtime_error("least_squares: normal matrix is not positive definite");
    g(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= g(i, k) * g(j, k);
      g(i, j) = s / g(j, j);
    }
  }
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= g(i, k) * rhs(k, c);
      rhs(i, c) = s / g(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = rhs(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= g(k, i) * rhs(k, c);
      rhs(i, c) = s / g(i, i);
    }
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Training loops

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
  }
  return idx;
}

namespace {

template <class StepFn>
std::vector<double> run_epochs(std::size_t n_rows, const TrainOptions& options, StepFn&& step_fn) {
  if (options.batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  std::vector<double> curve;
  curve.reserve(options.epochs);
  Rng shuffle_rng = Rng(options.seed).split(0x73687566);  // "shuf"
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = shuffled_indices(n_rows, shuffle_rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < n_rows; begin += options.batch_size) {
      const std::size_t end = std::min(n_rows, begin + options.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const double loss = step_fn(rows, step);
      if (!std::isfinite(loss)) throw DivergenceError(step, loss);
      total += loss * static_cast<double>(rows.size());
      ++step;
    }
    curve.push_back(total / static_cast<double>(n_rows));
    if (options.on_epoch_end) options.on_epoch_end(epoch, curve.back());
  }
  return curve;
}

}  // namespace

std::vector<double> train(Cascade& cascade, const Matrix& x, const Matrix& y, const LossFn& loss,
                          const SgdConfig& sgd, const TrainOptions& options) {
  if (x.rows() != y.rows()) throw DimensionError("train: X and Y row counts differ");
  if (options.epochs == 0) return {};
  if (x.cols() != cascade.in_size() || y.cols() != cascade.out_size()) {
    throw DimensionError("train: dataset widths " + std::to_string(x.cols()) + "->" +
                         std::to_string(y.cols()) + " do not match cascade " +
                         std::to_string(cascade.in_size()) + "->" +
                         std::to_string(cascade.out_size()));
  }
  cascade.zero_grad();
  const auto params = cascade.params();
  SgdState state;
  auto curve = run_epochs(x.rows(), options, [&](std::span<const std::size_t> rows, std::size_t step) {
    const Matrix xb = gather_rows(x, rows);
    const Matrix yb = gather_rows(y, rows);
    const LossResult r = loss(cascade.forward(xb), yb);
    if (!std::isfinite(r.loss)) return r.loss;
    cascade.backward(r.grad);
    sgd_step(params, state, sgd, step);
    return r.loss;
  });
  cascade.clear_cache();
  return curve;
}

std::vector<double> train(Cascade& cascade, const RegressionDataset& data, const SgdConfig& sgd,
                          const TrainOptions& options) {
  return train(cascade, data.x, data.y, mse_loss, sgd, options);
}

std::vector<double> train_complex(Cascade& cascade, const ComplexMatrix& x,
                                  const ComplexMatrix& y, const SgdConfig& sgd,
                                  const TrainOptions& options) {
  if (x.rows() != y.rows()) throw DimensionError("train_complex: X and Y row counts differ");
  if (options.epochs == 0) return {};
  if (x.cols() != cascade.in_size() || y.cols() != cascade.out_size()) {
    throw DimensionError("train_complex: dataset widths do not match cascade");
  }
  cascade.zero_grad();
  const auto params = cascade.params();
  SgdState state;
  auto curve = run_epochs(x.rows(), options, [&](std::span<const std::size_t> rows, std::size_t step) {
    const ComplexMatrix xb(gather_rows(x.re, rows), gather_rows(x.im, rows));
    const ComplexMatrix yb(gather_rows(y.re, rows), gather_rows(y.im, rows));
    const ComplexLossResult r = complex_mse_loss(cascade.forward(xb), yb);
    if (!std::isfinite(r.loss)) return r.loss;
    cascade.backward(r.grad);
    sgd_step(params, state, sgd, step);
    return r.loss;
  });
  cascade.clear_cache();
  return curve;
}

}  // namespace sell
