#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "perturbopt/nn/tensor.hpp"

namespace perturbopt::nn {

/// A set of examples. `inputs` has shape (n, input dims...). Classification
/// batches fill `labels`; regression batches fill `targets` with shape
/// (n, outputs).
struct Batch {
  Tensor inputs;
  std::vector<std::int32_t> labels;
  Tensor targets;

  std::size_t size() const noexcept { return inputs.shape.empty() ? 0 : inputs.shape[0]; }
  bool is_classification() const noexcept { return !labels.empty(); }

  /// Examples at `indices`, in that order.
  Batch subset(std::span<const std::size_t> indices) const;
  /// Examples [begin, begin + count).
  Batch slice(std::size_t begin, std::size_t count) const;

  bool operator==(const Batch&) const = default;
};

/// Concatenation of two batches with identical per-example shapes.
Batch concat(const Batch& a, const Batch& b);

}  // namespace perturbopt::nn
