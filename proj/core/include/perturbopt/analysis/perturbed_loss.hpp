#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/objective.hpp"
#include "perturbopt/perturb/perturb.hpp"

namespace perturbopt::analysis {

struct RwpSampler {
  double sigma = 0.0;
  perturb::Distribution distribution = perturb::Distribution::filter_wise;
};

/// First-order adversarial perturbation of radius rho. With `full_data` the
/// attack uses the gradient over all of `data`; otherwise each consecutive
/// chunk of `batch_size` examples is attacked with its own gradient and the
/// chunk losses are averaged with example weights.
struct AwpSampler {
  double rho = 0.0;
  bool full_data = true;
  std::size_t batch_size = 256;
};

using Sampler = std::variant<RwpSampler, AwpSampler>;

struct PerturbedLoss {
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
  std::size_t n_samples = 0;
};

/// Mean of L(w + eps) over `n_samples` draws (RWP) or the deterministic AWP
/// loss. Sample i draws from substream i of `seed`, so the estimate does not
/// depend on `workers`.
PerturbedLoss expected_perturbed_loss(const nn::Objective& obj, const nn::ParamVector& w, const Sampler& sampler,
                                      const nn::Batch& data, std::size_t n_samples, std::uint64_t seed,
                                      unsigned workers = 1);

/// Filter-wise sigma whose perturbation has E||eps||^2 = r^2:
/// sigma = r / sqrt(sum_j len_j ||w^(j)||^2).
double sigma_for_radius(const nn::ParamVector& w, double radius);

struct SweepResult {
  std::vector<double> radii;
  std::vector<double> awp_loss;
  std::vector<double> rwp_loss;
  std::vector<double> rwp_stderr;
  std::vector<double> rwp_median;
  std::vector<double> rwp_sigma;
  std::size_t n_samples = 0;
};

/// AWP loss at rho = r and RWP loss at the radius-matched sigma for every r.
/// Radii must be positive and strictly ascending.
SweepResult radius_sweep(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                         const std::vector<double>& radii, std::size_t n_samples, std::uint64_t seed,
                         unsigned workers = 1);

/// Smallest RWP radius (geometric bisection on [lo, hi], common random
/// numbers across radii) whose mean perturbed loss reaches `target_loss`.
/// Returns hi when the target is not reached inside the bracket.
double rwp_radius_for_loss(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                           double target_loss, std::size_t n_samples, std::uint64_t seed, double lo, double hi,
                           unsigned workers = 1);

/// 10^lo_exp .. 10^hi_exp in `count` log-spaced points.
std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t count);

}  // namespace perturbopt::analysis
