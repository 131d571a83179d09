#include "perturbopt/optim/optimizer.hpp"

#include "perturbopt/errors.hpp"

namespace perturbopt::optim {

Optimizer::Optimizer(OptimizerConfig cfg, const nn::FilterLayout& layout, Rng perturbation_rng, unsigned workers)
    : cfg_(std::move(cfg)), layout_(layout), rng_(perturbation_rng), workers_(workers == 0 ? 1 : workers) {
  cfg_.validate();
  if (is_adaptive(cfg_.method)) adaptive_ = perturb::AdaptiveState::fresh(layout_, cfg_.perturb.elementwise_history);
}

StepResult Optimizer::step(const nn::Objective& obj, const nn::ParamVector& w, const BatchPair& pair, std::size_t t,
                           std::size_t total, bool telemetry) {
  const double lr = lr_at(t, total, cfg_);
  const UpdateRule rule{cfg_.momentum, cfg_.weight_decay};
  RandomPerturbation rp;
  rp.sigma = perturb::sigma_at(t, total, cfg_.perturb);
  rp.eta = cfg_.perturb.eta;
  rp.beta_decay = cfg_.perturb.beta_decay;
  rp.distribution = cfg_.perturb.distribution;
  perturb::AdaptiveState* adaptive = adaptive_ ? &*adaptive_ : nullptr;

  StepResult r;
  switch (cfg_.method) {
    case Method::sgd:
      r = step_sgd(obj, w, pair.b1, lr, rule, velocity_);
      break;
    case Method::sam:
      r = step_sam(obj, w, pair.b1, pair.b2, lr, cfg_.perturb.rho, cfg_.m_sharpness, rule, velocity_);
      break;
    case Method::rwp:
    case Method::arwp:
      r = step_rwp(obj, w, pair.b1, lr, rp, rng_, adaptive, rule, velocity_, telemetry);
      break;
    case Method::mrwp:
    case Method::marwp:
      r = step_mrwp(obj, w, pair, lr, cfg_.lambda, rp, rng_, adaptive, rule, velocity_, workers_);
      break;
  }
  if (cfg_.method == Method::sgd) r.sigma_used = 0.0;
  if (cfg_.method == Method::sam) r.sigma_used = 0.0;
  grad_evals_ += gradient_evaluations_per_step(cfg_.method);
  return r;
}

}  // namespace perturbopt::optim
