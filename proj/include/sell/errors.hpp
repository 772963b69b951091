#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sell {

/// Operand shapes do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called out of order, e.g. backward before forward.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Request is well-formed but not supported by this layer or cascade.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad configuration file or option.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, double loss)
      : std::runtime_error("training diverged at step " + std::to_string(step) +
                           " (loss = " + std::to_string(loss) + ")"),
        step_(step),
        loss_(loss) {}

  std::size_t step() const noexcept { return step_; }
  double loss() const noexcept { return loss_; }

 private:
  std::size_t step_;
  double loss_;
};

}  // namespace sell
