#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <variant>
#include <vector>

#include "sell/layers.hpp"
#include "sell/rng.hpp"
#include "sell/tensor.hpp"

namespace sell {

using Layer = std::variant<AcdcLayer, AfdfLayer, ReluLayer, PermutationLayer, DenseLayer>;

std::string_view layer_kind(const Layer& layer) noexcept;
std::size_t layer_in_size(const Layer& layer) noexcept;
std::size_t layer_out_size(const Layer& layer) noexcept;
std::size_t layer_param_count(const Layer& layer) noexcept;

/// Ordered composition of layers applied left to right (y = x L1 L2 ... Lk).
///
/// A cascade is evaluated either on real signals (ACDC, ReLU, dense and
/// permutation layers) or on complex signals (AFDF and permutation layers);
/// mixing the two domains is rejected at evaluation time.
class Cascade {
 public:
  Cascade() = default;
  explicit Cascade(std::uint64_t seed) : seed_(seed) {}

  /// Throws DimensionError if the layer input does not match the current output size.
  Cascade& add(Layer layer);

  std::size_t depth() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }
  std::size_t in_size() const;
  std::size_t out_size() const;

  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  std::vector<Layer>& layers() noexcept { return layers_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  bool is_real() const;
  bool is_complex() const;
  bool is_linear() const;

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_y);
  Matrix apply(const Matrix& x) const;

  ComplexMatrix forward(const ComplexMatrix& x);
  ComplexMatrix backward(const ComplexMatrix& grad_y);
  ComplexMatrix apply(const ComplexMatrix& x) const;

  std::vector<ParamView> params();
  void zero_grad();
  void clear_cache();

 private:
  std::uint64_t seed_ = 0;
  std::vector<Layer> layers_;
};

std::size_t count_params(const Cascade& cascade);

/// K identity-configured ACDC layers of size n (pure linear, no ReLU).
Cascade make_acdc_cascade(std::size_t n, std::size_t depth, std::uint64_t seed = 0);

/// K AFDF layers of size n; the first has A fixed to the identity.
Cascade make_afdf_cascade(std::size_t n, std::size_t depth, std::uint64_t seed = 0);

/// [ACDC -> ReLU -> Permutation] x (blocks-1) followed by a final bare ACDC.
/// Permutations are drawn once from `seed` and frozen.
Cascade make_acdc_relu_stack(std::size_t n, std::size_t blocks, std::uint64_t seed);

PermutationLayer random_permutation(std::size_t n, Rng& rng);

// -- Oracles ----------------------------------------------------------------

/// Explicit N x M matrix M with x * M == forward(x) for zero biases. Biases
/// contribute an affine offset, reported by materialize_offset().
/// Throws UnsupportedError on ReLU or on complex layers.
Matrix materialize(const Cascade& cascade);
Matrix materialize(const AcdcLayer& layer);
/// Output of the cascade at x = 0.
Matrix materialize_offset(const Cascade& cascade);

/// Complex counterpart for AFDF / permutation cascades.
ComplexMatrix materialize_complex(const Cascade& cascade);
ComplexMatrix materialize_complex(const AfdfLayer& layer);

/// Fourier-domain factorization of an AFDF cascade,
///   yhat = xhat [R_1] D_1 R_2 D_2 ... R_K D_K,  R_k = F^-1 A_k F,
/// where the leading R_1 is present only when A_1 is not the identity.
struct OpticalFactor {
  enum class Kind { diagonal, circulant };
  Kind kind;
  /// diagonal: 1 x N row of diagonal entries; circulant: full N x N matrix.
  ComplexMatrix matrix;
};

struct OpticalPresentation {
  std::size_t n = 0;
  std::vector<OpticalFactor> factors;

  /// Product of all factors, i.e. the operator on Fourier-domain row vectors.
  ComplexMatrix fourier_operator() const;
  /// Spatial-domain operator F * fourier_operator() * F^-1.
  ComplexMatrix reassemble() const;
};

/// Throws UnsupportedError unless the cascade contains only AFDF layers.
OpticalPresentation optical_presentation(const Cascade& cascade);

/// Max over wrapped diagonals of the spread of entries; zero for circulants.
double circulant_defect(const ComplexMatrix& m);

// -- Serialization ------------------------------------------------------------

/// Line-oriented text format with type tags, sizes, seed and format version.
/// Parameters are printed with 17 significant digits and round-trip exactly.
void save_cascade(const Cascade& cascade, std::ostream& out);
Cascade load_cascade(std::istream& in);

inline constexpr int kCascadeFormatVersion = 1;

}  // namespace sell
