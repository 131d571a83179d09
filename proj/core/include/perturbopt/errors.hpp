#pragma once

#include <stdexcept>
#include <string>

namespace perturbopt {

/// Raised when inputs violate a documented precondition (shapes, ranges,
/// malformed files or configs). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when training produces a non-finite loss or iterate. The CLI maps
/// it to exit code 2.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t last_finite_step)
      : std::runtime_error(what), last_finite_step_(last_finite_step) {}

  std::size_t last_finite_step() const noexcept { return last_finite_step_; }

 private:
  std::size_t last_finite_step_;
};

}  // namespace perturbopt
