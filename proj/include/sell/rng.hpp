#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "sell/tensor.hpp"

namespace sell {

/// Counter-based generator: draw i is a pure function of (key, i), so streams
/// are bit-identical across runs and platforms and can be split into
/// independent substreams by tag.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller.
  double gaussian();
  double gaussian(double mean, double stddev);
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Independent generator derived from this one's seed and a tag. Does not
  /// advance this generator.
  Rng split(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_gaussian_;
};

Matrix rand_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi);
Matrix rand_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev);

}  // namespace sell
