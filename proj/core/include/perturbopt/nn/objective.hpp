#pragma once

#include <functional>
#include <span>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/model.hpp"

namespace perturbopt::nn {

/// A differentiable training objective L_B(w). Implementations are pure and
/// safe to evaluate concurrently from several threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual const FilterLayout& layout() const noexcept = 0;
  virtual double loss(std::span<const double> w, const Batch& batch) const = 0;
  /// Writes the gradient into `grad` (length layout().total_dim) and returns the loss.
  virtual double loss_and_grad(std::span<const double> w, const Batch& batch, std::span<double> grad) const = 0;
  /// Whether accuracy() is meaningful.
  virtual bool is_classifier() const noexcept { return false; }
  virtual double accuracy(std::span<const double> w, const Batch& batch) const;

  std::size_t dim() const noexcept { return layout().total_dim; }
};

/// Objective backed by a feed-forward model.
class ModelObjective final : public Objective {
 public:
  explicit ModelObjective(ModelSpec model);

  const ModelSpec& model() const noexcept { return model_; }
  const FilterLayout& layout() const noexcept override { return layout_; }
  double loss(std::span<const double> w, const Batch& batch) const override;
  double loss_and_grad(std::span<const double> w, const Batch& batch, std::span<double> grad) const override;
  bool is_classifier() const noexcept override;
  double accuracy(std::span<const double> w, const Batch& batch) const override;

 private:
  ModelSpec model_;
  FilterLayout layout_;
};

/// L(w) = 0.5 * w^T A w, independent of the batch (full-batch, zero gradient
/// noise). A is dense, symmetric, row-major d x d.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::vector<double> a, std::size_t d);
  QuadraticObjective(std::vector<double> a, std::size_t d, FilterLayout layout);

  const std::vector<double>& matrix() const noexcept { return a_; }
  const FilterLayout& layout() const noexcept override { return layout_; }
  double loss(std::span<const double> w, const Batch& batch) const override;
  double loss_and_grad(std::span<const double> w, const Batch& batch, std::span<double> grad) const override;

  /// A * v
  std::vector<double> apply(std::span<const double> v) const;

 private:
  std::vector<double> a_;
  std::size_t d_;
  FilterLayout layout_;
};

using GradientFn = std::function<void(std::span<const double> w, std::span<double> grad)>;

/// Central-difference Hessian-vector product
///   (grad(w + h v^) - grad(w - h v^)) / (2h) * ||v||,  v^ = v / ||v||.
/// Throws ValidationError when v is zero or h <= 0.
std::vector<double> hvp(const GradientFn& grad, std::span<const double> w, std::span<const double> v, double h);

ParamVector hvp(const ModelSpec& model, const ParamVector& w, const Batch& batch, const ParamVector& v, double h);

/// Default HVP step 1e-4 * (1 + ||w||_inf).
double default_hvp_step(std::span<const double> w) noexcept;

}  // namespace perturbopt::nn
