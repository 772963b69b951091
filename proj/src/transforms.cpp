#include "sell/transforms.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "sell/errors.hpp"

namespace sell {

namespace {

void require_width(const Matrix& x, std::size_t n, const char* op) {
  if (x.cols() != n) {
    throw DimensionError(std::string(op) + ": expected " + std::to_string(n) + " columns, got " +
                         std::to_string(x.cols()));
  }
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

DctMode default_dct_mode(std::size_t n) noexcept {
  return is_power_of_two(n) ? DctMode::fast : DctMode::naive;
}

// ---------------------------------------------------------------------------
// FFT

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_power_of_two(n)) {
    throw UnsupportedError("FftPlan: size " + std::to_string(n) + " is not a power of two");
  }
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (unsigned b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= 1u << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  cos_.resize(n / 2);
  sin_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    cos_[k] = std::cos(theta);
    sin_[k] = std::sin(theta);
  }
}

void FftPlan::forward(std::span<double> re, std::span<double> im) const {
  transform(re, im, false);
}

void FftPlan::inverse(std::span<double> re, std::span<double> im) const {
  transform(re, im, true);
  const double s = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    re[i] *= s;
    im[i] *= s;
  }
}

void FftPlan::transform(std::span<double> re, std::span<double> im, bool inverse) const {
  if (re.size() != n_ || im.size() != n_) {
    throw DimensionError("FftPlan: buffer length does not match plan size " + std::to_string(n_));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t base = 0; base < n_; base += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const double wr = cos_[j * stride];
        const double wi = sign * sin_[j * stride];
        const std::size_t p = base + j;
        const std::size_t q = p + half;
        const double tr = re[q] * wr - im[q] * wi;
        const double ti = re[q] * wi + im[q] * wr;
        re[q] = re[p] - tr;
        im[q] = im[p] - ti;
        re[p] += tr;
        im[p] += ti;
      }
    }
  }
}

ComplexMatrix fft(const FftPlan& plan, const ComplexMatrix& x) {
  require_width(x.re, plan.size(), "fft");
  ComplexMatrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) plan.forward(out.re.row(r), out.im.row(r));
  return out;
}

ComplexMatrix ifft(const FftPlan& plan, const ComplexMatrix& x) {
  require_width(x.re, plan.size(), "ifft");
  ComplexMatrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) plan.inverse(out.re.row(r), out.im.row(r));
  return out;
}

ComplexMatrix dft_matrix(std::size_t n, bool inverse) {
  ComplexMatrix f(n, n);
  const double sign = inverse ? 1.0 : -1.0;
  const double s = inverse ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      // Reduce the exponent first so large n keeps full accuracy.
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((a * b) % n) /
                           static_cast<double>(n);
      f.re(a, b) = s * std::cos(phase);
      f.im(a, b) = s * sign * std::sin(phase);
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// DCT

DctPlan::DctPlan(std::size_t n, DctMode mode) : n_(n), mode_(mode) {
  if (n == 0) throw DimensionError("DctPlan: size must be positive");
  norm_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    norm_[k] = std::sqrt(2.0 / static_cast<double>(n)) * (k == 0 ? std::numbers::sqrt2 / 2.0 : 1.0);
  }
  if (mode == DctMode::naive) {
    cosine_ = cosine_matrix().data();
    return;
  }
  if (!is_power_of_two(n)) {
    throw UnsupportedError("DctPlan: fast mode requires a power-of-two size, got " +
                           std::to_string(n));
  }
  fft_ = std::make_unique<FftPlan>(n);
  tw_cos_.resize(n);
  tw_sin_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
    tw_cos_[k] = std::cos(theta);
    tw_sin_[k] = std::sin(theta);
  }
}

Matrix DctPlan::cosine_matrix() const {
  if (!cosine_.empty()) return Matrix(n_, n_, cosine_);
  Matrix c(n_, n_);
  const double two_n = 2.0 * static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = 0; k < n_; ++k) {
      // (2i+1)k mod 4N keeps the cosine argument small.
      const std::size_t m = ((2 * i + 1) * k) % (4 * n_);
      c(i, k) = norm_[k] * std::cos(std::numbers::pi * static_cast<double>(m) / two_n);
    }
  }
  return c;
}

void DctPlan::forward_row(std::span<const double> in, std::span<double> out,
                          std::vector<double>& scratch) const {
  if (mode_ == DctMode::fast) {
    makhoul_forward_row(in, out, scratch);
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double xi = in[i];
    const double* c = cosine_.data() + i * n_;
    for (std::size_t k = 0; k < n_; ++k) out[k] += xi * c[k];
  }
}

void DctPlan::inverse_row(std::span<const double> in, std::span<double> out,
                          std::vector<double>& scratch) const {
  if (mode_ == DctMode::fast) {
    makhoul_inverse_row(in, out, scratch);
    return;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const double* c = cosine_.data() + i * n_;
    double acc = 0.0;
    for (std::size_t k = 0; k < n_; ++k) acc += in[k] * c[k];
    out[i] = acc;
  }
}

void DctPlan::makhoul_forward_row(std::span<const double> in, std::span<double> out,
                                  std::vector<double>& scratch) const {
  if (!fft_) throw UnsupportedError("makhoul_forward_row: plan is not in fast mode");
  scratch.resize(2 * n_);
  std::span<double> re(scratch.data(), n_);
  std::span<double> im(scratch.data() + n_, n_);
  const std::size_t half = n_ / 2;
  for (std::size_t i = 0; i < half; ++i) {
    re[i] = in[2 * i];
    re[n_ - 1 - i] = in[2 * i + 1];
  }
  if (n_ == 1) re[0] = in[0];
  std::fill(im.begin(), im.end(), 0.0);
  fft_->forward(re, im);
  // Re(V_k exp(-i pi k / 2N)), then orthonormal scaling.
  for (std::size_t k = 0; k < n_; ++k) {
    out[k] = norm_[k] * (re[k] * tw_cos_[k] + im[k] * tw_sin_[k]);
  }
}

void DctPlan::makhoul_inverse_row(std::span<const double> in, std::span<double> out,
                                  std::vector<double>& scratch) const {
  if (!fft_) throw UnsupportedError("makhoul_inverse_row: plan is not in fast mode");
  scratch.resize(2 * n_);
  std::span<double> re(scratch.data(), n_);
  std::span<double> im(scratch.data() + n_, n_);
  // Undo the orthonormal scaling to get the unnormalized DCT-II coefficients
  // X_k, then V_k = exp(i pi k / 2N) (X_k - i X_{N-k}) with X_N = 0.
  for (std::size_t k = 0; k < n_; ++k) {
    const double u = in[k] / norm_[k];
    const double w = k == 0 ? 0.0 : in[n_ - k] / norm_[n_ - k];
    re[k] = u * tw_cos_[k] + w * tw_sin_[k];
    im[k] = u * tw_sin_[k] - w * tw_cos_[k];
  }
  fft_->inverse(re, im);
  const std::size_t half = n_ / 2;
  for (std::size_t i = 0; i < half; ++i) {
    out[2 * i] = re[i];
    out[2 * i + 1] = re[n_ - 1 - i];
  }
  if (n_ == 1) out[0] = re[0];
}

std::shared_ptr<const DctPlan> shared_dct_plan(std::size_t n, DctMode mode) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, DctMode>, std::shared_ptr<const DctPlan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n, mode}];
  if (!slot) slot = std::make_shared<const DctPlan>(n, mode);
  return slot;
}

std::shared_ptr<const FftPlan> shared_fft_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const FftPlan>(n);
  return slot;
}

Matrix dct(const DctPlan& plan, const Matrix& x) {
  require_width(x, plan.size(), "dct");
  Matrix out(x.rows(), x.cols());
  std::vector<double> scratch;
  for (std::size_t r = 0; r < x.rows(); ++r) plan.forward_row(x.row(r), out.row(r), scratch);
  return out;
}

Matrix idct(const DctPlan& plan, const Matrix& x) {
  require_width(x, plan.size(), "idct");
  Matrix out(x.rows(), x.cols());
  std::vector<double> scratch;
  for (std::size_t r = 0; r < x.rows(); ++r) plan.inverse_row(x.row(r), out.row(r), scratch);
  return out;
}

Matrix fast_dct_makhoul(const DctPlan& plan, const Matrix& x) {
  if (plan.mode() != DctMode::fast) {
    throw UnsupportedError("fast_dct_makhoul: requires a fast (power-of-two) plan");
  }
  return dct(plan, x);
}

Matrix fast_idct_makhoul(const DctPlan& plan, const Matrix& x) {
  if (plan.mode() != DctMode::fast) {
    throw UnsupportedError("fast_idct_makhoul: requires a fast (power-of-two) plan");
  }
  return idct(plan, x);
}

}  // namespace sell
