#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace perturbopt::nn {

/// Dense row-major tensor of doubles. `shape` product always equals
/// `data.size()`.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

  static Tensor zeros(std::vector<std::size_t> shape_);

  std::size_t numel() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  bool empty() const noexcept { return data.empty(); }

  /// Number of elements per leading-dimension slice (1 for rank-1 tensors).
  std::size_t row_size() const noexcept;

  std::span<const double> row(std::size_t i) const noexcept {
    return {data.data() + i * row_size(), row_size()};
  }
  std::span<double> row(std::size_t i) noexcept { return {data.data() + i * row_size(), row_size()}; }

  bool operator==(const Tensor&) const = default;
};

std::size_t shape_product(std::span<const std::size_t> shape) noexcept;

/// Small dense-vector helpers shared across modules.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
double norm(std::span<const double> a) noexcept;
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
bool all_finite(std::span<const double> a) noexcept;

}  // namespace perturbopt::nn
