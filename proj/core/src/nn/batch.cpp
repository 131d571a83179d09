#include "perturbopt/nn/batch.hpp"

#include <algorithm>
#include <string>

#include "perturbopt/errors.hpp"

namespace perturbopt::nn {

namespace {

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> indices) {
  if (t.empty()) return {};
  const std::size_t row = t.row_size();
  auto shape = t.shape;
  shape[0] = indices.size();
  std::vector<double> data;
  data.reserve(indices.size() * row);
  for (auto i : indices) {
    if (i >= t.shape[0]) throw ValidationError("example index " + std::to_string(i) + " out of range");
    const auto r = t.row(i);
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

Batch Batch::subset(std::span<const std::size_t> indices) const {
  Batch out;
  out.inputs = gather_rows(inputs, indices);
  out.targets = gather_rows(targets, indices);
  if (!labels.empty()) {
    out.labels.reserve(indices.size());
    for (auto i : indices) out.labels.push_back(labels.at(i));
  }
  return out;
}

Batch Batch::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) throw ValidationError("batch slice out of range");
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = begin + i;
  return subset(idx);
}

Batch concat(const Batch& a, const Batch& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.inputs.row_size() != b.inputs.row_size() || a.is_classification() != b.is_classification()) {
    throw ValidationError("cannot concatenate batches with different example shapes");
  }
  Batch out = a;
  out.inputs.shape[0] += b.size();
  out.inputs.data.insert(out.inputs.data.end(), b.inputs.data.begin(), b.inputs.data.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  if (!a.targets.empty()) {
    out.targets.shape[0] += b.size();
    out.targets.data.insert(out.targets.data.end(), b.targets.data.begin(), b.targets.data.end());
  }
  return out;
}

}  // namespace perturbopt::nn
