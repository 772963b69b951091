#pragma once

// Central finite-difference verification of analytic gradients. The probe
// loss is L = sum(y * R) for a fixed random R, so dL/dy = R.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sell/cascade.hpp"
#include "sell/tensor.hpp"

namespace sell {

/// max_i |a_i - n_i| / max(max|a|, max|n|, 1e-12)
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

struct GradCheckReport {
  /// Worst relative error over all parameter tensors and the input gradient.
  double max_rel_error = 0.0;
  std::string worst_tensor;
};

/// Compares backward() against central differences of apply() for every
/// parameter tensor of the cascade and for the input.
GradCheckReport gradcheck(Cascade& cascade, const Matrix& x, const Matrix& probe,
                          double eps = 1e-6);
GradCheckReport gradcheck(Cascade& cascade, const ComplexMatrix& x, const ComplexMatrix& probe,
                          double eps = 1e-6);

struct GradCheckCase {
  std::string layer;  // acdc | afdf | dense | relu | permutation
  std::size_t n = 0;
  std::size_t batch = 0;
  std::size_t config = 0;
  GradCheckReport report;
};

struct GradCheckSuiteOptions {
  std::vector<std::size_t> sizes{4, 8, 16};
  std::vector<std::size_t> batches{1, 3};
  std::size_t configs = 5;
  double eps = 1e-6;
  std::uint64_t seed = 1;
};

/// Every layer type at every (size, batch, config) with randomized parameters.
std::vector<GradCheckCase> run_gradcheck_suite(const GradCheckSuiteOptions& options = {});

}  // namespace sell
