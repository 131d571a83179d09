#pragma once

#include <optional>
#include <span>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/objective.hpp"
#include "perturbopt/perturb/perturb.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::optim {

/// Heavy-ball momentum and decoupled-from-buffer weight decay:
///   v <- momentum * v + g
///   w <- w - lr * (v + weight_decay * w)
struct UpdateRule {
  double momentum = 0.0;
  double weight_decay = 0.0;
};

/// Momentum buffer carried between steps. An empty buffer reads as zeros.
using Velocity = std::vector<double>;

struct StepResult {
  nn::ParamVector new_w;
  double loss_main = 0.0;                 ///< clean mini-batch loss at w_t
  std::optional<double> loss_perturbed;   ///< loss at the perturbed point
  std::optional<double> grad_norm;        ///< ||grad L_B(w_t)|| when evaluated
  double sigma_used = 0.0;
  std::optional<double> epsilon_radius;
};

/// B1 feeds the perturbed gradient, B2 the clean one. With "same" pairing
/// they hold the identical examples.
struct BatchPair {
  nn::Batch b1;
  nn::Batch b2;
};

/// Random-perturbation settings consumed by the RWP-family steps.
struct RandomPerturbation {
  double sigma = 0.0;
  double eta = 0.1;
  double beta_decay = 0.99;
  perturb::Distribution distribution = perturb::Distribution::filter_wise;
};

/// Applies the update rule to `w` with combined gradient `g`.
nn::ParamVector apply_update(const nn::ParamVector& w, std::span<const double> g, double lr, const UpdateRule& rule,
                             Velocity& velocity);

StepResult step_sgd(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& batch, double lr,
                    const UpdateRule& rule, Velocity& velocity);

/// Adversarial step. `attack` supplies the gradient for the perturbation and
/// `update` the gradient at the perturbed point; pass the same batch twice for
/// standard SAM. With m_sharpness = m > 0 both batches are split into chunks
/// of m examples, each chunk gets its own perturbation, and the perturbed
/// chunk gradients are averaged.
StepResult step_sam(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& attack,
                    const nn::Batch& update, double lr, double rho, std::size_t m_sharpness, const UpdateRule& rule,
                    Velocity& velocity);

/// Random-perturbation step w <- w - lr * grad L_B(w + eps). When `adaptive`
/// is non-null the perturbation is drawn from its adaptive law and the state
/// is advanced with the perturbed gradient afterwards. `clean_grad_telemetry`
/// spends one extra (uncounted) gradient evaluation on ||grad L_B(w)||.
StepResult step_rwp(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& batch, double lr,
                    const RandomPerturbation& rp, Rng& rng, perturb::AdaptiveState* adaptive, const UpdateRule& rule,
                    Velocity& velocity, bool clean_grad_telemetry = false);

/// Mixed step w <- w - lr * (lambda g_p + (1 - lambda) g_c) with
/// g_p = grad L_B1(w + eps) and g_c = grad L_B2(w). The perturbation is drawn
/// before dispatch; with workers >= 2 the two gradients run concurrently. The
/// result does not depend on `workers`.
StepResult step_mrwp(const nn::Objective& obj, const nn::ParamVector& w, const BatchPair& pair, double lr,
                     double lambda, const RandomPerturbation& rp, Rng& rng, perturb::AdaptiveState* adaptive,
                     const UpdateRule& rule, Velocity& velocity, unsigned workers = 1);

}  // namespace perturbopt::optim
