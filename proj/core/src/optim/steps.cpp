#include "perturbopt/optim/steps.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"

namespace perturbopt::optim {

namespace {

struct Evaluation {
  double loss = 0.0;
  std::vector<double> grad;
};

Evaluation evaluate(const nn::Objective& obj, std::span<const double> w, const nn::Batch& batch) {
  Evaluation e;
  e.grad.resize(w.size());
  e.loss = obj.loss_and_grad(w, batch, e.grad);
  return e;
}

std::vector<double> shifted(std::span<const double> w, std::span<const double> eps) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] + eps[i];
  return out;
}

perturb::PerturbSample draw(const nn::ParamVector& w, const RandomPerturbation& rp, Rng& rng,
                            const perturb::AdaptiveState* adaptive) {
  if (!(rp.sigma >= 0.0)) throw ValidationError("sigma must be >= 0");
  if (adaptive) return perturb::sample_arwp(w, rp.sigma, rp.eta, *adaptive, rng, rp.distribution);
  return perturb::sample_rwp(w, rp.sigma, rng, rp.distribution);
}

}  // namespace

nn::ParamVector apply_update(const nn::ParamVector& w, std::span<const double> g, double lr, const UpdateRule& rule,
                             Velocity& velocity) {
  const std::size_t d = w.size();
  if (g.size() != d) throw ValidationError("gradient length does not match parameters");
  if (velocity.empty()) velocity.assign(d, 0.0);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    velocity[i] = rule.momentum * velocity[i] + g[i];
    out[i] = w.values[i] - lr * (velocity[i] + rule.weight_decay * w.values[i]);
  }
  return nn::ParamVector(std::move(out), w.layout);
}

StepResult step_sgd(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& batch, double lr,
                    const UpdateRule& rule, Velocity& velocity) {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
  const auto e = evaluate(obj, w.span(), batch);
  StepResult r;
  r.loss_main = e.loss;
  r.grad_norm = nn::norm(e.grad);
  r.new_w = apply_update(w, e.grad, lr, rule, velocity);
  return r;
}

StepResult step_sam(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& attack,
                    const nn::Batch& update, double lr, double rho, std::size_t m_sharpness, const UpdateRule& rule,
                    Velocity& velocity) {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
  if (!(rho >= 0.0)) throw ValidationError("rho must be >= 0");
  if (attack.size() != update.size()) throw ValidationError("SAM attack and update batches differ in size");
  const std::size_t n = attack.size();
  // Data-free objectives (n == 0) are a single chunk.
  const std::size_t m = (m_sharpness == 0 || m_sharpness >= n) ? std::max<std::size_t>(n, 1) : m_sharpness;
  if (n % m != 0) {
    throw ValidationError("m_sharpness " + std::to_string(m) + " does not divide batch size " + std::to_string(n));
  }
  const std::size_t chunks = std::max<std::size_t>(n / m, 1);
  const std::size_t d = w.size();

  std::vector<double> clean_sum(d, 0.0);
  std::vector<double> pert_sum(d, 0.0);
  double loss_sum = 0.0;
  double pert_loss_sum = 0.0;
  double radius_sum = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const nn::Batch a = chunks == 1 ? attack : attack.slice(c * m, m);
    const nn::Batch u = chunks == 1 ? update : update.slice(c * m, m);
    const auto clean = evaluate(obj, w.span(), a);
    const auto eps = perturb::awp_direction(clean.grad, rho);
    const auto pert = evaluate(obj, shifted(w.span(), eps.epsilon), u);
    nn::axpy(1.0, clean.grad, clean_sum);
    nn::axpy(1.0, pert.grad, pert_sum);
    loss_sum += clean.loss;
    pert_loss_sum += pert.loss;
    radius_sum += eps.radius;
  }
  const double inv = 1.0 / static_cast<double>(chunks);
  for (std::size_t i = 0; i < d; ++i) {
    clean_sum[i] *= inv;
    pert_sum[i] *= inv;
  }

  StepResult r;
  r.loss_main = loss_sum * inv;
  r.loss_perturbed = pert_loss_sum * inv;
  r.grad_norm = nn::norm(clean_sum);
  r.epsilon_radius = radius_sum * inv;
  r.new_w = apply_update(w, pert_sum, lr, rule, velocity);
  return r;
}

StepResult step_rwp(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& batch, double lr,
                    const RandomPerturbation& rp, Rng& rng, perturb::AdaptiveState* adaptive, const UpdateRule& rule,
                    Velocity& velocity, bool clean_grad_telemetry) {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
  const auto eps = draw(w, rp, rng, adaptive);
  const auto pert = evaluate(obj, shifted(w.span(), eps.epsilon), batch);

  StepResult r;
  r.sigma_used = rp.sigma;
  r.epsilon_radius = eps.radius;
  r.loss_perturbed = pert.loss;
  if (clean_grad_telemetry) {
    const auto clean = evaluate(obj, w.span(), batch);
    r.loss_main = clean.loss;
    r.grad_norm = nn::norm(clean.grad);
  } else {
    r.loss_main = obj.loss(w.span(), batch);
  }
  if (adaptive) *adaptive = perturb::update_adaptive_state(std::move(*adaptive), pert.grad, w.layout, rp.beta_decay);
  r.new_w = apply_update(w, pert.grad, lr, rule, velocity);
  return r;
}

StepResult step_mrwp(const nn::Objective& obj, const nn::ParamVector& w, const BatchPair& pair, double lr,
                     double lambda, const RandomPerturbation& rp, Rng& rng, perturb::AdaptiveState* adaptive,
                     const UpdateRule& rule, Velocity& velocity, unsigned workers) {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  const auto eps = draw(w, rp, rng, adaptive);
  const auto perturbed_point = shifted(w.span(), eps.epsilon);

  Evaluation gp;
  Evaluation gc;
  if (workers >= 2) {
    auto fut = std::async(std::launch::async, [&] { return evaluate(obj, perturbed_point, pair.b1); });
    gc = evaluate(obj, w.span(), pair.b2);
    gp = fut.get();
  } else {
    gp = evaluate(obj, perturbed_point, pair.b1);
    gc = evaluate(obj, w.span(), pair.b2);
  }

  const std::size_t d = w.size();
  std::vector<double> combined(d);
  for (std::size_t i = 0; i < d; ++i) combined[i] = lambda * gp.grad[i] + (1.0 - lambda) * gc.grad[i];

  StepResult r;
  r.sigma_used = rp.sigma;
  r.epsilon_radius = eps.radius;
  r.loss_main = gc.loss;
  r.loss_perturbed = gp.loss;
  r.grad_norm = nn::norm(gc.grad);
  if (adaptive) *adaptive = perturb::update_adaptive_state(std::move(*adaptive), gp.grad, w.layout, rp.beta_decay);
  r.new_w = apply_update(w, combined, lr, rule, velocity);
  return r;
}

}  // namespace perturbopt::optim
