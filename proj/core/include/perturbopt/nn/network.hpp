#pragma once

#include <span>
#include <utility>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/model.hpp"

namespace perturbopt::nn {

/// Model outputs (logits or regression predictions), shape (n, outputs).
Tensor forward(const ModelSpec& model, std::span<const double> w, const Batch& batch);

/// Mean per-example loss. Throws ValidationError on dimension mismatch.
double loss(const ModelSpec& model, std::span<const double> w, const Batch& batch);
double loss(const ModelSpec& model, const ParamVector& w, const Batch& batch);

/// Mean loss and its exact gradient by reverse-mode accumulation.
/// `grad` must have the parameter count's length; it is overwritten.
double loss_and_grad(const ModelSpec& model, std::span<const double> w, const Batch& batch,
                     std::span<double> grad);
std::pair<double, ParamVector> loss_and_grad(const ModelSpec& model, const ParamVector& w, const Batch& batch);

/// Fraction of examples whose argmax output equals the label. Ties go to the
/// lowest class index. Rejects regression heads.
double accuracy(const ModelSpec& model, std::span<const double> w, const Batch& batch);
double accuracy(const ModelSpec& model, const ParamVector& w, const Batch& batch);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> v) noexcept;

}  // namespace perturbopt::nn
