#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "perturbopt/nn/objective.hpp"
#include "perturbopt/optim/config.hpp"
#include "perturbopt/optim/steps.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::optim {

/// Stateful coordinator: owns the momentum buffer, the perturbation
/// generator, and (for arwp/marwp) the adaptive history, and dispatches each
/// iteration to the step rule selected by the config.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, const nn::FilterLayout& layout, Rng perturbation_rng, unsigned workers = 1);

  /// Iteration t in [1, T]. `telemetry` requests the clean gradient norm when
  /// the method does not compute it anyway.
  StepResult step(const nn::Objective& obj, const nn::ParamVector& w, const BatchPair& pair, std::size_t t,
                  std::size_t total, bool telemetry);

  const OptimizerConfig& config() const noexcept { return cfg_; }
  const std::optional<perturb::AdaptiveState>& adaptive_state() const noexcept { return adaptive_; }
  std::uint64_t gradient_evaluations() const noexcept { return grad_evals_; }

 private:
  OptimizerConfig cfg_;
  nn::FilterLayout layout_;
  Rng rng_;
  unsigned workers_;
  Velocity velocity_;
  std::optional<perturb::AdaptiveState> adaptive_;
  std::uint64_t grad_evals_ = 0;
};

}  // namespace perturbopt::optim
