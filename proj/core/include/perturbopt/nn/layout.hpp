#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "perturbopt/nn/model.hpp"

namespace perturbopt::nn {

/// Contiguous index range [start, start + length) of one filter group.
struct Group {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const Group&) const = default;
};

/// Partition of parameter indices into k filter groups.
///
/// Groups are disjoint, in ascending order, and cover [0, total_dim).
struct FilterLayout {
  std::vector<Group> groups;
  std::size_t total_dim = 0;

  std::size_t k() const noexcept { return groups.size(); }

  /// One group spanning every index.
  static FilterLayout single(std::size_t dim);
  /// One group per coordinate.
  static FilterLayout per_coordinate(std::size_t dim);

  /// Throws ValidationError unless the groups partition [0, total_dim).
  void validate() const;

  template <class T>
  std::span<T> slice(std::span<T> v, std::size_t j) const noexcept {
    return v.subspan(groups[j].start, groups[j].length);
  }

  bool operator==(const FilterLayout&) const = default;
};

/// Squared 2-norm of each group of `v`.
std::vector<double> group_squared_norms(std::span<const double> v, const FilterLayout& layout);

/// Flat trainable parameters together with their filter layout.
struct ParamVector {
  std::vector<double> values;
  FilterLayout layout;

  ParamVector() = default;
  ParamVector(std::vector<double> values_, FilterLayout layout_);

  /// Zero vector over `layout`.
  static ParamVector zeros(const FilterLayout& layout);

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> span() const noexcept { return values; }
  std::span<double> span() noexcept { return values; }
  std::span<const double> group(std::size_t j) const noexcept { return layout.slice(span(), j); }

  bool operator==(const ParamVector&) const = default;
};

/// One group per dense output-neuron weight row, one per conv output filter,
/// one per bias vector. Parameters are laid out layer by layer, weights
/// before biases.
FilterLayout build_layout(const ModelSpec& model);

/// Glorot-uniform weights, a = sqrt(6 / (fan_in + fan_out)); zero biases.
ParamVector init_params(const ModelSpec& model, std::uint64_t seed);

}  // namespace perturbopt::nn
