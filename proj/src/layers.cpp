#include "sell/layers.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sell/errors.hpp"

namespace sell {

namespace {

void require_width(std::size_t got, std::size_t want, const char* op) {
  if (got != want) {
    throw DimensionError(std::string(op) + ": expected width " + std::to_string(want) + ", got " +
                         std::to_string(got));
  }
}

void require_cache(bool has_cache, const char* op) {
  if (!has_cache) throw StateError(std::string(op) + ": backward called before forward");
}

void require_rows(std::size_t got, std::size_t want, const char* op) {
  if (got != want) {
    throw DimensionError(std::string(op) + ": gradient batch size " + std::to_string(got) +
                         " does not match cached forward batch " + std::to_string(want));
  }
}

}  // namespace

std::string_view to_string(ParamGroup g) noexcept {
  switch (g) {
    case ParamGroup::diag_a: return "diag_a";
    case ParamGroup::diag_d: return "diag_d";
    case ParamGroup::bias: return "bias";
    case ParamGroup::weight: return "weight";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ACDC

AcdcLayer::AcdcLayer(std::size_t n, DctMode mode)
    : n_(n),
      plan_(shared_dct_plan(n, mode)),
      a_(n, 1.0),
      d_(n, 1.0),
      bias_(n, 0.0),
      grad_a_(n, 0.0),
      grad_d_(n, 0.0),
      grad_bias_(n, 0.0) {}

Matrix AcdcLayer::apply(const Matrix& x, bool with_bias, std::size_t threads) const {
  require_width(x.cols(), n_, "AcdcLayer::apply");
  Matrix y(x.rows(), n_);
  parallel_rows(x.rows(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> h(n_), g(n_), scratch;
    for (std::size_t r = begin; r < end; ++r) {
      auto xr = x.row(r);
      for (std::size_t i = 0; i < n_; ++i) h[i] = xr[i] * a_[i];
      plan_->forward_row(h, g, scratch);
      for (std::size_t k = 0; k < n_; ++k) g[k] = g[k] * d_[k] + (with_bias ? bias_[k] : 0.0);
      plan_->inverse_row(g, y.row(r), scratch);
    }
  });
  return y;
}

Matrix AcdcLayer::forward(const Matrix& x) {
  require_width(x.cols(), n_, "AcdcLayer::forward");
  cached_x_ = x;
  cached_h2_ = Matrix(x.rows(), n_);
  Matrix y(x.rows(), n_);
  std::vector<double> h(n_), h3(n_), scratch;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    auto h2 = cached_h2_.row(r);
    for (std::size_t i = 0; i < n_; ++i) h[i] = xr[i] * a_[i];
    plan_->forward_row(h, h2, scratch);
    for (std::size_t k = 0; k < n_; ++k) h3[k] = h2[k] * d_[k] + bias_[k];
    plan_->inverse_row(h3, y.row(r), scratch);
  }
  has_cache_ = true;
  return y;
}

Matrix AcdcLayer::backward(const Matrix& grad_y) {
  require_cache(has_cache_, "AcdcLayer::backward");
  require_width(grad_y.cols(), n_, "AcdcLayer::backward");
  require_rows(grad_y.rows(), cached_x_.rows(), "AcdcLayer::backward");
  Matrix grad_x(grad_y.rows(), n_);
  std::vector<double> g3(n_), g1(n_), scratch;
  for (std::size_t r = 0; r < grad_y.rows(); ++r) {
    plan_->forward_row(grad_y.row(r), g3, scratch);
    auto h2 = cached_h2_.row(r);
    for (std::size_t k = 0; k < n_; ++k) {
      grad_bias_[k] += g3[k];
      grad_d_[k] += h2[k] * g3[k];
      g3[k] *= d_[k];
    }
    plan_->inverse_row(g3, g1, scratch);
    auto xr = cached_x_.row(r);
    auto gx = grad_x.row(r);
    for (std::size_t i = 0; i < n_; ++i) {
      grad_a_[i] += xr[i] * g1[i];
      gx[i] = a_[i] * g1[i];
    }
  }
  return grad_x;
}

std::vector<ParamView> AcdcLayer::params() {
  return {{"a", ParamGroup::diag_a, a_, grad_a_},
          {"d", ParamGroup::diag_d, d_, grad_d_},
          {"bias", ParamGroup::bias, bias_, grad_bias_}};
}

void AcdcLayer::zero_grad() {
  std::fill(grad_a_.begin(), grad_a_.end(), 0.0);
  std::fill(grad_d_.begin(), grad_d_.end(), 0.0);
  std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
}

void AcdcLayer::clear_cache() {
  cached_x_ = Matrix();
  cached_h2_ = Matrix();
  has_cache_ = false;
}

// ---------------------------------------------------------------------------
// AFDF

AfdfLayer::AfdfLayer(std::size_t n)
    : n_(n),
      plan_(shared_fft_plan(n)),
      a_re_(n, 1.0),
      a_im_(n, 0.0),
      d_re_(n, 1.0),
      d_im_(n, 0.0),
      grad_a_re_(n, 0.0),
      grad_a_im_(n, 0.0),
      grad_d_re_(n, 0.0),
      grad_d_im_(n, 0.0) {}

bool AfdfLayer::a_is_identity() const {
  return std::all_of(a_re_.begin(), a_re_.end(), [](double v) { return v == 1.0; }) &&
         std::all_of(a_im_.begin(), a_im_.end(), [](double v) { return v == 0.0; });
}

ComplexMatrix AfdfLayer::apply(const ComplexMatrix& x) const {
  require_width(x.cols(), n_, "AfdfLayer::apply");
  ComplexMatrix y(x.rows(), n_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.re.row(r), xi = x.im.row(r);
    auto yr = y.re.row(r), yi = y.im.row(r);
    for (std::size_t i = 0; i < n_; ++i) {
      yr[i] = xr[i] * a_re_[i] - xi[i] * a_im_[i];
      yi[i] = xr[i] * a_im_[i] + xi[i] * a_re_[i];
    }
    plan_->forward(yr, yi);
    for (std::size_t k = 0; k < n_; ++k) {
      const double pr = yr[k] * d_re_[k] - yi[k] * d_im_[k];
      const double pi = yr[k] * d_im_[k] + yi[k] * d_re_[k];
      yr[k] = pr;
      yi[k] = pi;
    }
    plan_->inverse(yr, yi);
  }
  return y;
}

ComplexMatrix AfdfLayer::forward(const ComplexMatrix& x) {
  require_width(x.cols(), n_, "AfdfLayer::forward");
  cached_x_ = x;
  cached_h2_ = ComplexMatrix(x.rows(), n_);
  ComplexMatrix y(x.rows(), n_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.re.row(r), xi = x.im.row(r);
    auto hr = cached_h2_.re.row(r), hi = cached_h2_.im.row(r);
    for (std::size_t i = 0; i < n_; ++i) {
      hr[i] = xr[i] * a_re_[i] - xi[i] * a_im_[i];
      hi[i] = xr[i] * a_im_[i] + xi[i] * a_re_[i];
    }
    plan_->forward(hr, hi);
    auto yr = y.re.row(r), yi = y.im.row(r);
    for (std::size_t k = 0; k < n_; ++k) {
      yr[k] = hr[k] * d_re_[k] - hi[k] * d_im_[k];
      yi[k] = hr[k] * d_im_[k] + hi[k] * d_re_[k];
    }
    plan_->inverse(yr, yi);
  }
  has_cache_ = true;
  return y;
}

ComplexMatrix AfdfLayer::backward(const ComplexMatrix& grad_y) {
  require_cache(has_cache_, "AfdfLayer::backward");
  require_width(grad_y.cols(), n_, "AfdfLayer::backward");
  require_rows(grad_y.rows(), cached_x_.rows(), "AfdfLayer::backward");
  // With G = dL/dRe + i dL/dIm, a complex-linear map y = M h pulls back as
  // G_h = M^H G_y and a product y = h * w as G_h = G_y * conj(w).
  const double inv_n = 1.0 / static_cast<double>(n_);
  const double nn = static_cast<double>(n_);
  ComplexMatrix grad_x(grad_y.rows(), n_);
  std::vector<double> gr(n_), gi(n_);
  for (std::size_t r = 0; r < grad_y.rows(); ++r) {
    std::copy_n(grad_y.re.row(r).begin(), n_, gr.begin());
    std::copy_n(grad_y.im.row(r).begin(), n_, gi.begin());
    // Through ifft: (1/N) F.
    plan_->forward(gr, gi);
    auto hr = cached_h2_.re.row(r), hi = cached_h2_.im.row(r);
    for (std::size_t k = 0; k < n_; ++k) {
      gr[k] *= inv_n;
      gi[k] *= inv_n;
      grad_d_re_[k] += gr[k] * hr[k] + gi[k] * hi[k];
      grad_d_im_[k] += gi[k] * hr[k] - gr[k] * hi[k];
      const double tr = gr[k] * d_re_[k] + gi[k] * d_im_[k];
      const double ti = gi[k] * d_re_[k] - gr[k] * d_im_[k];
      gr[k] = tr;
      gi[k] = ti;
    }
    // Through fft: conj(F) = N * ifft.
    plan_->inverse(gr, gi);
    auto xr = cached_x_.re.row(r), xi = cached_x_.im.row(r);
    auto gxr = grad_x.re.row(r), gxi = grad_x.im.row(r);
    for (std::size_t i = 0; i < n_; ++i) {
      gr[i] *= nn;
      gi[i] *= nn;
      if (trainable_a_) {
        grad_a_re_[i] += gr[i] * xr[i] + gi[i] * xi[i];
        grad_a_im_[i] += gi[i] * xr[i] - gr[i] * xi[i];
      }
      gxr[i] = gr[i] * a_re_[i] + gi[i] * a_im_[i];
      gxi[i] = gi[i] * a_re_[i] - gr[i] * a_im_[i];
    }
  }
  return grad_x;
}

std::vector<ParamView> AfdfLayer::params() {
  std::vector<ParamView> out;
  if (trainable_a_) {
    out.push_back({"a_re", ParamGroup::diag_a, a_re_, grad_a_re_});
    out.push_back({"a_im", ParamGroup::diag_a, a_im_, grad_a_im_});
  }
  out.push_back({"d_re", ParamGroup::diag_d, d_re_, grad_d_re_});
  out.push_back({"d_im", ParamGroup::diag_d, d_im_, grad_d_im_});
  return out;
}

void AfdfLayer::zero_grad() {
  for (auto* g : {&grad_a_re_, &grad_a_im_, &grad_d_re_, &grad_d_im_}) {
    std::fill(g->begin(), g->end(), 0.0);
  }
}

void AfdfLayer::clear_cache() {
  cached_x_ = ComplexMatrix();
  cached_h2_ = ComplexMatrix();
  has_cache_ = false;
}

// ---------------------------------------------------------------------------
// ReLU

Matrix ReluLayer::apply(const Matrix& x) const {
  require_width(x.cols(), n_, "ReluLayer::apply");
  Matrix y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix ReluLayer::forward(const Matrix& x) {
  require_width(x.cols(), n_, "ReluLayer::forward");
  mask_ = Matrix(x.rows(), x.cols());
  Matrix y = x;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const bool on = x.values()[k] > 0.0;
    mask_.values()[k] = on ? 1.0 : 0.0;
    if (!on) y.values()[k] = 0.0;
  }
  has_cache_ = true;
  return y;
}

Matrix ReluLayer::backward(const Matrix& grad_y) {
  require_cache(has_cache_, "ReluLayer::backward");
  require_width(grad_y.cols(), n_, "ReluLayer::backward");
  require_rows(grad_y.rows(), mask_.rows(), "ReluLayer::backward");
  return elementwise_mul(grad_y, mask_);
}

void ReluLayer::clear_cache() {
  mask_ = Matrix();
  has_cache_ = false;
}

// ---------------------------------------------------------------------------
// Permutation

PermutationLayer::PermutationLayer(std::vector<std::size_t> perm)
    : perm_(std::move(perm)), inverse_(perm_.size(), perm_.size()) {
  for (std::size_t j = 0; j < perm_.size(); ++j) {
    const std::size_t src = perm_[j];
    if (src >= perm_.size() || inverse_[src] != perm_.size()) {
      throw std::invalid_argument("PermutationLayer: not a bijection on 0.." +
                                  std::to_string(perm_.size() - 1));
    }
    inverse_[src] = j;
  }
}

PermutationLayer PermutationLayer::identity(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return PermutationLayer(std::move(p));
}

Matrix PermutationLayer::forward(const Matrix& x) const {
  require_width(x.cols(), size(), "PermutationLayer::forward");
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    auto yr = y.row(r);
    for (std::size_t j = 0; j < perm_.size(); ++j) yr[j] = xr[perm_[j]];
  }
  return y;
}

Matrix PermutationLayer::backward(const Matrix& grad_y) const {
  require_width(grad_y.cols(), size(), "PermutationLayer::backward");
  Matrix g(grad_y.rows(), grad_y.cols());
  for (std::size_t r = 0; r < grad_y.rows(); ++r) {
    auto gy = grad_y.row(r);
    auto gx = g.row(r);
    for (std::size_t i = 0; i < perm_.size(); ++i) gx[i] = gy[inverse_[i]];
  }
  return g;
}

ComplexMatrix PermutationLayer::forward(const ComplexMatrix& x) const {
  return ComplexMatrix(forward(x.re), forward(x.im));
}

ComplexMatrix PermutationLayer::backward(const ComplexMatrix& grad_y) const {
  return ComplexMatrix(backward(grad_y.re), backward(grad_y.im));
}

// ---------------------------------------------------------------------------
// Dense

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : weight_(in, out), bias_(out, 0.0), grad_weight_(in, out), grad_bias_(out, 0.0) {}

Matrix DenseLayer::apply(const Matrix& x, bool with_bias, std::size_t threads) const {
  require_width(x.cols(), in_size(), "DenseLayer::apply");
  const std::size_t in = in_size();
  const std::size_t out = out_size();
  Matrix y(x.rows(), out);
  parallel_rows(x.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double* yr = y.row(r).data();
      if (with_bias) std::copy(bias_.begin(), bias_.end(), yr);
      const double* xr = x.row(r).data();
      for (std::size_t k = 0; k < in; ++k) {
        const double s = xr[k];
        const double* wr = weight_.row(k).data();
        for (std::size_t j = 0; j < out; ++j) yr[j] += s * wr[j];
      }
    }
  });
  return y;
}

Matrix DenseLayer::forward(const Matrix& x) {
  Matrix y = apply(x);
  cached_x_ = x;
  has_cache_ = true;
  return y;
}

Matrix DenseLayer::backward(const Matrix& grad_y) {
  require_cache(has_cache_, "DenseLayer::backward");
  require_width(grad_y.cols(), out_size(), "DenseLayer::backward");
  require_rows(grad_y.rows(), cached_x_.rows(), "DenseLayer::backward");
  const std::size_t in = in_size();
  const std::size_t out = out_size();
  Matrix grad_x(grad_y.rows(), in);
  for (std::size_t r = 0; r < grad_y.rows(); ++r) {
    auto gy = grad_y.row(r);
    auto xr = cached_x_.row(r);
    auto gx = grad_x.row(r);
    for (std::size_t j = 0; j < out; ++j) grad_bias_[j] += gy[j];
    for (std::size_t k = 0; k < in; ++k) {
      auto gw = grad_weight_.row(k);
      auto wr = weight_.row(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < out; ++j) {
        gw[j] += xr[k] * gy[j];
        acc += wr[j] * gy[j];
      }
      gx[k] = acc;
    }
  }
  return grad_x;
}

std::vector<ParamView> DenseLayer::params() {
  return {{"weight", ParamGroup::weight, weight_.values(), grad_weight_.values()},
          {"bias", ParamGroup::bias, bias_, grad_bias_}};
}

void DenseLayer::zero_grad() {
  grad_weight_.fill(0.0);
  std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
}

void DenseLayer::clear_cache() {
  cached_x_ = Matrix();
  has_cache_ = false;
}

}  // namespace sell
