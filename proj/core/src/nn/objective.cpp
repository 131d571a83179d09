#include "perturbopt/nn/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/network.hpp"
#include "perturbopt/nn/tensor.hpp"

namespace perturbopt::nn {

double Objective::accuracy(std::span<const double>, const Batch&) const {
  throw ValidationError("accuracy is undefined for this objective");
}

ModelObjective::ModelObjective(ModelSpec model) : model_(std::move(model)), layout_(build_layout(model_)) {}

double ModelObjective::loss(std::span<const double> w, const Batch& batch) const {
  return nn::loss(model_, w, batch);
}

double ModelObjective::loss_and_grad(std::span<const double> w, const Batch& batch, std::span<double> grad) const {
  return nn::loss_and_grad(model_, w, batch, grad);
}

bool ModelObjective::is_classifier() const noexcept { return model_.loss_head == LossHead::softmax_cross_entropy; }

double ModelObjective::accuracy(std::span<const double> w, const Batch& batch) const {
  return nn::accuracy(model_, w, batch);
}

QuadraticObjective::QuadraticObjective(std::vector<double> a, std::size_t d)
    : QuadraticObjective(std::move(a), d, FilterLayout::single(d)) {}

QuadraticObjective::QuadraticObjective(std::vector<double> a, std::size_t d, FilterLayout layout)
    : a_(std::move(a)), d_(d), layout_(std::move(layout)) {
  if (d_ == 0 || a_.size() != d_ * d_) throw ValidationError("quadratic matrix must be d x d with d >= 1");
  if (layout_.total_dim != d_) throw ValidationError("quadratic layout dimension mismatch");
  layout_.validate();
}

std::vector<double> QuadraticObjective::apply(std::span<const double> v) const {
  if (v.size() != d_) throw ValidationError("quadratic objective expects a vector of length " + std::to_string(d_));
  std::vector<double> out(d_);
  for (std::size_t i = 0; i < d_; ++i) out[i] = dot(std::span(a_).subspan(i * d_, d_), v);
  return out;
}

double QuadraticObjective::loss(std::span<const double> w, const Batch&) const {
  const auto aw = apply(w);
  return 0.5 * dot(w, aw);
}

double QuadraticObjective::loss_and_grad(std::span<const double> w, const Batch&, std::span<double> grad) const {
  const auto aw = apply(w);
  std::copy(aw.begin(), aw.end(), grad.begin());
  return 0.5 * dot(w, aw);
}

std::vector<double> hvp(const GradientFn& grad, std::span<const double> w, std::span<const double> v, double h) {
  if (!(h > 0.0)) throw ValidationError("hvp step h must be positive");
  if (v.size() != w.size()) throw ValidationError("hvp direction length mismatch");
  const double vn = norm(v);
  if (!(vn > 0.0)) throw ValidationError("hvp direction must be non-zero");
  const std::size_t d = w.size();
  std::vector<double> plus(w.begin(), w.end());
  std::vector<double> minus(w.begin(), w.end());
  for (std::size_t i = 0; i < d; ++i) {
    const double step = h * (v[i] / vn);
    plus[i] += step;
    minus[i] -= step;
  }
  std::vector<double> gp(d), gm(d);
  grad(plus, gp);
  grad(minus, gm);
  std::vector<double> out(d);
  const double scale = vn / (2.0 * h);
  for (std::size_t i = 0; i < d; ++i) out[i] = (gp[i] - gm[i]) * scale;
  return out;
}

ParamVector hvp(const ModelSpec& model, const ParamVector& w, const Batch& batch, const ParamVector& v, double h) {
  GradientFn g = [&](std::span<const double> x, std::span<double> out) { nn::loss_and_grad(model, x, batch, out); };
  return ParamVector(hvp(g, w.span(), v.span(), h), w.layout);
}

double default_hvp_step(std::span<const double> w) noexcept {
  double m = 0.0;
  for (double x : w) m = std::max(m, std::abs(x));
  return 1e-4 * (1.0 + m);
}

}  // namespace perturbopt::nn
