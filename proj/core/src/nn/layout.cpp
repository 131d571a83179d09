#include "perturbopt/nn/layout.hpp"

#include <cmath>
#include <string>
#include <variant>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::nn {

FilterLayout FilterLayout::single(std::size_t dim) { return FilterLayout{{Group{0, dim}}, dim}; }

FilterLayout FilterLayout::per_coordinate(std::size_t dim) {
  FilterLayout l;
  l.total_dim = dim;
  l.groups.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) l.groups.push_back({i, 1});
  return l;
}

void FilterLayout::validate() const {
  if (groups.empty()) throw ValidationError("filter layout needs at least one group");
  std::size_t next = 0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (groups[j].start != next || groups[j].length == 0) {
      throw ValidationError("filter group " + std::to_string(j) + " does not continue the partition at index " +
                            std::to_string(next));
    }
    next += groups[j].length;
  }
  if (next != total_dim) {
    throw ValidationError("filter groups cover " + std::to_string(next) + " indices, expected " +
                          std::to_string(total_dim));
  }
}

std::vector<double> group_squared_norms(std::span<const double> v, const FilterLayout& layout) {
  std::vector<double> out(layout.k());
  for (std::size_t j = 0; j < layout.k(); ++j) out[j] = squared_norm(layout.slice(v, j));
  return out;
}

ParamVector::ParamVector(std::vector<double> values_, FilterLayout layout_)
    : values(std::move(values_)), layout(std::move(layout_)) {
  if (values.size() != layout.total_dim) {
    throw ValidationError("parameter vector length " + std::to_string(values.size()) +
                          " does not match layout dimension " + std::to_string(layout.total_dim));
  }
}

ParamVector ParamVector::zeros(const FilterLayout& layout) {
  return ParamVector(std::vector<double>(layout.total_dim, 0.0), layout);
}

FilterLayout build_layout(const ModelSpec& model) {
  model.validate();
  FilterLayout layout;
  std::size_t offset = 0;
  auto push = [&](std::size_t len) {
    layout.groups.push_back({offset, len});
    offset += len;
  };
  for (const auto& layer : model.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      for (std::size_t o = 0; o < d->out; ++o) push(d->in);
      if (d->bias) push(d->out);
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
      for (std::size_t o = 0; o < c->out_ch; ++o) push(c->in_ch * c->kernel_h * c->kernel_w);
      if (c->bias) push(c->out_ch);
    }
  }
  layout.total_dim = offset;
  return layout;
}

ParamVector init_params(const ModelSpec& model, std::uint64_t seed) {
  FilterLayout layout = build_layout(model);
  std::vector<double> values(layout.total_dim, 0.0);
  Rng rng(seed);
  std::size_t offset = 0;
  for (const auto& layer : model.layers) {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      fan_in = d->in;
      fan_out = d->out;
    } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
      fan_in = c->in_ch * c->kernel_h * c->kernel_w;
      fan_out = c->out_ch * c->kernel_h * c->kernel_w;
    }
    const std::size_t nw = weight_count(layer);
    if (nw > 0) {
      const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (std::size_t i = 0; i < nw; ++i) {
        // uniform() is in [0,1); reject the single endpoint -a.
        double x = 0.0;
        do {
          x = rng.uniform(-a, a);
        } while (x == -a);
        values[offset + i] = x;
      }
    }
    offset += nw + bias_count(layer);
  }
  return ParamVector(std::move(values), std::move(layout));
}

}  // namespace perturbopt::nn
