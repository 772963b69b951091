#include "sell/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sell {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), key_(mix64(seed ^ 0x5eedc0de5eedc0deULL)) {}

std::uint64_t Rng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(key_ + c * kGolden) ^ mix64(c ^ key_ >> 7);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("Rng::uniform: requires lo < hi");
  return lo + (hi - lo) * uniform();
}

double Rng::gaussian() {
  if (spare_gaussian_) {
    const double v = *spare_gaussian_;
    spare_gaussian_.reset();
    return v;
  }
  // 1 - u lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_gaussian_ = r * std::sin(theta);
  return r * std::cos(theta);
}

double Rng::gaussian(double mean, double stddev) {
  if (stddev < 0.0) throw std::invalid_argument("Rng::gaussian: stddev must be >= 0");
  if (stddev == 0.0) return mean;
  return mean + stddev * gaussian();
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

Rng Rng::split(std::uint64_t tag) const { return Rng(mix64(seed_ + kGolden * (tag + 1)) ^ tag); }

Matrix rand_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("rand_uniform: requires lo < hi");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

Matrix rand_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev) {
  if (stddev < 0.0) throw std::invalid_argument("rand_gaussian: stddev must be >= 0");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.gaussian(mean, stddev);
  return m;
}

}  // namespace sell
