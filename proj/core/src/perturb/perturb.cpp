#include "perturbopt/perturb/perturb.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"

namespace perturbopt::perturb {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

PerturbSample draw(const nn::FilterLayout& layout, std::span<const double> group_std,
                   std::span<const double> coord_scale, Rng& rng, PerturbKind kind) {
  PerturbSample s;
  s.kind = kind;
  s.epsilon.assign(layout.total_dim, 0.0);
  const std::uint64_t key = rng.next_u64();
  for (std::size_t j = 0; j < layout.k(); ++j) {
    if (group_std[j] == 0.0) continue;
    Rng sub = Rng::substream(key, j);
    const auto& g = layout.groups[j];
    for (std::size_t i = g.start; i < g.start + g.length; ++i) {
      const double scale = coord_scale.empty() ? group_std[j] : group_std[j] * coord_scale[i];
      s.epsilon[i] = scale * sub.normal();
    }
  }
  s.radius = nn::norm(s.epsilon);
  return s;
}

}  // namespace

void PerturbConfig::validate() const {
  if (!finite_nonneg(rho)) throw ValidationError("perturb.rho must be finite and >= 0");
  if (!finite_nonneg(sigma_max)) throw ValidationError("perturb.sigma_max must be finite and >= 0");
  if (!finite_nonneg(eta)) throw ValidationError("perturb.eta must be finite and >= 0");
  if (!(beta_decay >= 0.0 && beta_decay < 1.0)) throw ValidationError("perturb.beta_decay must lie in [0, 1)");
}

AdaptiveState AdaptiveState::fresh(const nn::FilterLayout& layout, bool elementwise) {
  AdaptiveState s;
  s.per_group_sum.assign(layout.k(), 0.0);
  if (elementwise) s.per_coord_sum.assign(layout.total_dim, 0.0);
  return s;
}

PerturbSample awp_direction(std::span<const double> grad, double rho) {
  if (!(rho >= 0.0)) throw ValidationError("awp radius rho must be >= 0");
  PerturbSample s;
  s.kind = PerturbKind::awp;
  s.epsilon.assign(grad.size(), 0.0);
  const double gn = nn::norm(grad);
  if (gn > kZeroNormThreshold) {
    const double scale = rho / gn;
    for (std::size_t i = 0; i < grad.size(); ++i) s.epsilon[i] = scale * grad[i];
  }
  s.radius = nn::norm(s.epsilon);
  return s;
}

std::vector<double> rwp_group_stddev(const nn::ParamVector& w, double sigma, Distribution dist) {
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be >= 0");
  std::vector<double> out(w.layout.k(), sigma);
  if (dist == Distribution::filter_wise) {
    for (std::size_t j = 0; j < w.layout.k(); ++j) {
      const double gn = nn::norm(w.group(j));
      out[j] = gn < kZeroNormThreshold ? 0.0 : sigma * gn;
    }
  }
  return out;
}

std::vector<double> arwp_group_stddev(const nn::ParamVector& w, double sigma, double eta,
                                      const AdaptiveState& state, Distribution dist) {
  if (state.per_group_sum.size() != w.layout.k()) throw ValidationError("adaptive state group count mismatch");
  auto out = rwp_group_stddev(w, sigma, dist);
  if (!state.elementwise()) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] /= std::sqrt(std::sqrt(1.0 + eta * state.per_group_sum[j]));
  }
  return out;
}

PerturbSample sample_rwp(const nn::ParamVector& w, double sigma, Rng& rng, Distribution dist) {
  const auto stds = rwp_group_stddev(w, sigma, dist);
  return draw(w.layout, stds, {}, rng, PerturbKind::rwp);
}

PerturbSample sample_arwp(const nn::ParamVector& w, double sigma, double eta, const AdaptiveState& state, Rng& rng,
                          Distribution dist) {
  if (state.t < 1) throw ValidationError("adaptive state iteration counter must be >= 1");
  const auto stds = arwp_group_stddev(w, sigma, eta, state, dist);
  std::vector<double> coord;
  if (state.elementwise()) {
    if (state.per_coord_sum.size() != w.size()) throw ValidationError("adaptive state dimension mismatch");
    coord.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) coord[i] = 1.0 / std::sqrt(std::sqrt(1.0 + eta * state.per_coord_sum[i]));
  }
  return draw(w.layout, stds, coord, rng, PerturbKind::arwp);
}

AdaptiveState update_adaptive_state(AdaptiveState state, std::span<const double> g, const nn::FilterLayout& layout,
                                    double beta_decay) {
  if (g.size() != layout.total_dim || state.per_group_sum.size() != layout.k()) {
    throw ValidationError("gradient layout does not match adaptive state");
  }
  if (state.elementwise() && state.per_coord_sum.size() != g.size()) {
    throw ValidationError("element-wise adaptive state dimension mismatch");
  }
  for (std::size_t j = 0; j < layout.k(); ++j) {
    state.per_group_sum[j] = beta_decay * state.per_group_sum[j] + nn::squared_norm(layout.slice(g, j));
  }
  for (std::size_t i = 0; i < state.per_coord_sum.size(); ++i) {
    state.per_coord_sum[i] = beta_decay * state.per_coord_sum[i] + g[i] * g[i];
  }
  ++state.t;
  return state;
}

double sigma_at(std::size_t t, std::size_t total, const PerturbConfig& cfg) {
  if (total < 1 || t > total) throw ValidationError("sigma_at requires 0 <= t <= T and T >= 1");
  if (cfg.schedule == SigmaSchedule::constant) return cfg.sigma_max;
  const double x = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
  return cfg.sigma_max * (1.0 - std::cos(x)) / 2.0;
}

std::string_view to_string(SigmaSchedule s) { return s == SigmaSchedule::constant ? "constant" : "cosine"; }

std::string_view to_string(Distribution d) { return d == Distribution::filter_wise ? "filter_wise" : "isotropic"; }

std::string_view to_string(PerturbKind k) {
  switch (k) {
    case PerturbKind::awp: return "awp";
    case PerturbKind::rwp: return "rwp";
    case PerturbKind::arwp: return "arwp";
  }
  return "rwp";
}

SigmaSchedule schedule_from_string(std::string_view s) {
  if (s == "constant") return SigmaSchedule::constant;
  if (s == "cosine" || s == "cosine-increase" || s == "cosine_increase") return SigmaSchedule::cosine;
  throw ValidationError("unknown sigma schedule '" + std::string(s) + "'");
}

Distribution distribution_from_string(std::string_view s) {
  if (s == "filter_wise" || s == "filter-wise" || s == "filterwise") return Distribution::filter_wise;
  if (s == "isotropic") return Distribution::isotropic;
  throw ValidationError("unknown perturbation distribution '" + std::string(s) + "'");
}

}  // namespace perturbopt::perturb
