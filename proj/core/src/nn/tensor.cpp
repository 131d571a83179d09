#include "perturbopt/nn/tensor.hpp"

#include <cmath>
#include <string>

#include "perturbopt/errors.hpp"

namespace perturbopt::nn {

std::size_t shape_product(std::span<const std::size_t> shape) noexcept {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  if (shape_product(shape) != data.size()) {
    throw ValidationError("tensor shape product " + std::to_string(shape_product(shape)) +
                          " does not match data length " + std::to_string(data.size()));
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape_) {
  const std::size_t n = shape_product(shape_);
  return Tensor(std::move(shape_), std::vector<double>(n, 0.0));
}

std::size_t Tensor::row_size() const noexcept {
  if (shape.size() <= 1) return 1;
  return shape_product(std::span(shape).subspan(1));
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

double norm(std::span<const double> a) noexcept { return std::sqrt(squared_norm(a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(std::span<const double> a) noexcept {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace perturbopt::nn
