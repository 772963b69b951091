#include "sell/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "sell/errors.hpp"
#include "sell/transforms.hpp"

namespace sell {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void wrong_domain(const Layer& layer, const char* domain) {
  throw UnsupportedError(std::string(layer_kind(layer)) + " layer cannot process " + domain +
                         " signals");
}

}  // namespace

std::string_view layer_kind(const Layer& layer) noexcept {
  return std::visit(overloaded{[](const AcdcLayer&) { return std::string_view("acdc"); },
                               [](const AfdfLayer&) { return std::string_view("afdf"); },
                               [](const ReluLayer&) { return std::string_view("relu"); },
                               [](const PermutationLayer&) { return std::string_view("permutation"); },
                               [](const DenseLayer&) { return std::string_view("dense"); }},
                    layer);
}

std::size_t layer_in_size(const Layer& layer) noexcept {
  return std::visit(overloaded{[](const DenseLayer& l) { return l.in_size(); },
                               [](const auto& l) { return l.size(); }},
                    layer);
}

std::size_t layer_out_size(const Layer& layer) noexcept {
  return std::visit(overloaded{[](const DenseLayer& l) { return l.out_size(); },
                               [](const auto& l) { return l.size(); }},
                    layer);
}

std::size_t layer_param_count(const Layer& layer) noexcept {
  return std::visit(overloaded{[](const AcdcLayer& l) { return l.param_count(); },
                               [](const AfdfLayer& l) { return l.param_count(); },
                               [](const DenseLayer& l) { return l.param_count(); },
                               [](const auto&) { return std::size_t{0}; }},
                    layer);
}

// ---------------------------------------------------------------------------

Cascade& Cascade::add(Layer layer) {
  if (!layers_.empty() && layer_in_size(layer) != out_size()) {
    throw DimensionError("Cascade::add: " + std::string(layer_kind(layer)) + " layer expects " +
                         std::to_string(layer_in_size(layer)) + " inputs but cascade produces " +
                         std::to_string(out_size()));
  }
  layers_.push_back(std::move(layer));
  return *this;
}

std::size_t Cascade::in_size() const {
  return layers_.empty() ? 0 : layer_in_size(layers_.front());
}

std::size_t Cascade::out_size() const {
  return layers_.empty() ? 0 : layer_out_size(layers_.back());
}

bool Cascade::is_real() const {
  return std::none_of(layers_.begin(), layers_.end(),
                      [](const Layer& l) { return std::holds_alternative<AfdfLayer>(l); });
}

bool Cascade::is_complex() const {
  return std::all_of(layers_.begin(), layers_.end(), [](const Layer& l) {
    return std::holds_alternative<AfdfLayer>(l) || std::holds_alternative<PermutationLayer>(l);
  });
}

bool Cascade::is_linear() const {
  return std::none_of(layers_.begin(), layers_.end(),
                      [](const Layer& l) { return std::holds_alternative<ReluLayer>(l); });
}

Matrix Cascade::forward(const Matrix& x) {
  Matrix h = x;
  for (auto& layer : layers_) {
    h = std::visit(overloaded{[&](AfdfLayer&) -> Matrix { wrong_domain(layer, "real"); },
                              [&](auto& l) -> Matrix { return l.forward(h); }},
                   layer);
  }
  return h;
}

Matrix Cascade::backward(const Matrix& grad_y) {
  Matrix g = grad_y;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = std::visit(overloaded{[&](AfdfLayer&) -> Matrix { wrong_domain(*it, "real"); },
                              [&](auto& l) -> Matrix { return l.backward(g); }},
                   *it);
  }
  return g;
}

Matrix Cascade::apply(const Matrix& x) const {
  Matrix h = x;
  for (const auto& layer : layers_) {
    h = std::visit(overloaded{[&](const AfdfLayer&) -> Matrix { wrong_domain(layer, "real"); },
                              [&](const PermutationLayer& l) -> Matrix { return l.forward(h); },
                              [&](const auto& l) -> Matrix { return l.apply(h); }},
                   layer);
  }
  return h;
}

ComplexMatrix Cascade::forward(const ComplexMatrix& x) {
  ComplexMatrix h = x;
  for (auto& layer : layers_) {
    h = std::visit(overloaded{[&](AfdfLayer& l) -> ComplexMatrix { return l.forward(h); },
                              [&](PermutationLayer& l) -> ComplexMatrix { return l.forward(h); },
                              [&](auto&) -> ComplexMatrix { wrong_domain(layer, "complex"); }},
                   layer);
  }
  return h;
}

ComplexMatrix Cascade::backward(const ComplexMatrix& grad_y) {
  ComplexMatrix g = grad_y;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = std::visit(overloaded{[&](AfdfLayer& l) -> ComplexMatrix { return l.backward(g); },
                              [&](PermutationLayer& l) -> ComplexMatrix { return l.backward(g); },
                              [&](auto&) -> ComplexMatrix { wrong_domain(*it, "complex"); }},
                   *it);
  }
  return g;
}

ComplexMatrix Cascade::apply(const ComplexMatrix& x) const {
  ComplexMatrix h = x;
  for (const auto& layer : layers_) {
    h = std::visit(
        overloaded{[&](const AfdfLayer& l) -> ComplexMatrix { return l.apply(h); },
                   [&](const PermutationLayer& l) -> ComplexMatrix { return l.forward(h); },
                   [&](const auto&) -> ComplexMatrix { wrong_domain(layer, "complex"); }},
        layer);
  }
  return h;
}

std::vector<ParamView> Cascade::params() {
  std::vector<ParamView> out;
  for (auto& layer : layers_) {
    std::visit(overloaded{[](ReluLayer&) {}, [](PermutationLayer&) {},
                          [&](auto& l) {
                            auto p = l.params();
                            out.insert(out.end(), p.begin(), p.end());
                          }},
               layer);
  }
  return out;
}

void Cascade::zero_grad() {
  for (auto& layer : layers_) {
    std::visit(overloaded{[](ReluLayer&) {}, [](PermutationLayer&) {},
                          [](auto& l) { l.zero_grad(); }},
               layer);
  }
}

void Cascade::clear_cache() {
  for (auto& layer : layers_) {
    std::visit(overloaded{[](PermutationLayer&) {}, [](auto& l) { l.clear_cache(); }}, layer);
  }
}

std::size_t count_params(const Cascade& cascade) {
  std::size_t total = 0;
  for (const auto& layer : cascade.layers()) total += layer_param_count(layer);
  return total;
}

Cascade make_acdc_cascade(std::size_t n, std::size_t depth, std::uint64_t seed) {
  Cascade c(seed);
  for (std::size_t k = 0; k < depth; ++k) c.add(AcdcLayer(n));
  return c;
}

Cascade make_afdf_cascade(std::size_t n, std::size_t depth, std::uint64_t seed) {
  Cascade c(seed);
  for (std::size_t k = 0; k < depth; ++k) {
    AfdfLayer layer(n);
    if (k == 0) layer.set_trainable_a(false);
    c.add(std::move(layer));
  }
  return c;
}

PermutationLayer random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  // Fisher-Yates on our own generator keeps the result platform independent.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return PermutationLayer(std::move(p));
}

Cascade make_acdc_relu_stack(std::size_t n, std::size_t blocks, std::uint64_t seed) {
  Cascade c(seed);
  Rng rng = Rng(seed).split(0x7065726d);  // "perm"
  for (std::size_t b = 0; b < blocks; ++b) {
    c.add(AcdcLayer(n));
    if (b + 1 == blocks) break;
    c.add(ReluLayer(n));
    c.add(random_permutation(n, rng));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Oracles

Matrix materialize(const AcdcLayer& layer) {
  return layer.apply(Matrix::identity(layer.size()), false);
}

Matrix materialize(const Cascade& cascade) {
  if (cascade.empty()) throw UnsupportedError("materialize: empty cascade");
  Matrix m = Matrix::identity(cascade.in_size());
  for (const auto& layer : cascade.layers()) {
    m = std::visit(
        overloaded{
            [&](const AcdcLayer& l) -> Matrix { return l.apply(m, false); },
            [&](const DenseLayer& l) -> Matrix { return l.apply(m, false); },
            [&](const PermutationLayer& l) -> Matrix { return l.forward(m); },
            [&](const ReluLayer&) -> Matrix {
              throw UnsupportedError("materialize: cascade contains a ReLU nonlinearity");
            },
            [&](const AfdfLayer&) -> Matrix {
              throw UnsupportedError("materialize: AFDF layers need materialize_complex");
            }},
        layer);
  }
  return m;
}

Matrix materialize_offset(const Cascade& cascade) {
  if (!cascade.is_linear()) {
    throw UnsupportedError("materialize_offset: cascade contains a ReLU nonlinearity");
  }
  return cascade.apply(Matrix(1, cascade.in_size()));
}

ComplexMatrix materialize_complex(const AfdfLayer& layer) {
  return layer.apply(ComplexMatrix::identity(layer.size()));
}

ComplexMatrix materialize_complex(const Cascade& cascade) {
  if (cascade.empty()) throw UnsupportedError("materialize_complex: empty cascade");
  if (!cascade.is_complex()) {
    throw UnsupportedError("materialize_complex: cascade contains real-only layers");
  }
  return cascade.apply(ComplexMatrix::identity(cascade.in_size()));
}

namespace {

ComplexMatrix diagonal_matrix(const ComplexMatrix& diag_row) {
  const std::size_t n = diag_row.cols();
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m.re(i, i) = diag_row.re(0, i);
    m.im(i, i) = diag_row.im(0, i);
  }
  return m;
}

// Right-multiplication by a diagonal scales columns.
ComplexMatrix times_diagonal(const ComplexMatrix& m, const ComplexMatrix& diag_row) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double dr = diag_row.re(0, j), di = diag_row.im(0, j);
      out.re(i, j) = m.re(i, j) * dr - m.im(i, j) * di;
      out.im(i, j) = m.re(i, j) * di + m.im(i, j) * dr;
    }
  }
  return out;
}

ComplexMatrix circulant_from_diagonal(const std::vector<double>& re, const std::vector<double>& im) {
  const std::size_t n = re.size();
  ComplexMatrix diag_row(Matrix::row_vector(re), Matrix::row_vector(im));
  const ComplexMatrix f = dft_matrix(n);
  const ComplexMatrix f_inv = dft_matrix(n, true);
  return matmul(matmul(f_inv, diagonal_matrix(diag_row)), f);
}

}  // namespace

ComplexMatrix OpticalPresentation::fourier_operator() const {
  ComplexMatrix acc = ComplexMatrix::identity(n);
  for (const auto& f : factors) {
    acc = f.kind == OpticalFactor::Kind::diagonal ? times_diagonal(acc, f.matrix)
                                                  : matmul(acc, f.matrix);
  }
  return acc;
}

ComplexMatrix OpticalPresentation::reassemble() const {
  return matmul(matmul(dft_matrix(n), fourier_operator()), dft_matrix(n, true));
}

OpticalPresentation optical_presentation(const Cascade& cascade) {
  if (cascade.empty()) throw UnsupportedError("optical_presentation: empty cascade");
  OpticalPresentation p;
  p.n = cascade.in_size();
  for (std::size_t k = 0; k < cascade.depth(); ++k) {
    const auto* layer = std::get_if<AfdfLayer>(&cascade.layers()[k]);
    if (layer == nullptr) {
      throw UnsupportedError("optical_presentation: non-AFDF layer '" +
                             std::string(layer_kind(cascade.layers()[k])) + "' at position " +
                             std::to_string(k));
    }
    if (k > 0 || !layer->a_is_identity()) {
      p.factors.push_back(
          {OpticalFactor::Kind::circulant, circulant_from_diagonal(layer->a_re(), layer->a_im())});
    }
    p.factors.push_back({OpticalFactor::Kind::diagonal,
                         ComplexMatrix(Matrix::row_vector(layer->d_re()),
                                       Matrix::row_vector(layer->d_im()))});
  }
  return p;
}

double circulant_defect(const ComplexMatrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw DimensionError("circulant_defect: matrix must be square");
  double worst = 0.0;
  for (std::size_t shift = 0; shift < n; ++shift) {
    const double r0 = m.re(0, shift), i0 = m.im(0, shift);
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t j = (i + shift) % n;
      worst = std::max(worst, std::hypot(m.re(i, j) - r0, m.im(i, j) - i0));
    }
  }
  return worst;
}

}  // namespace sell
