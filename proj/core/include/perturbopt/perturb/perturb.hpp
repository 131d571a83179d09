#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "perturbopt/nn/layout.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::perturb {

enum class SigmaSchedule { constant, cosine };

/// How the random perturbation scale is distributed over coordinates.
/// `filter_wise` scales group j by ||w^(j)||; `isotropic` uses sigma for every
/// coordinate (the law assumed by the convergence bounds).
enum class Distribution { filter_wise, isotropic };

struct PerturbConfig {
  double rho = 0.05;          ///< adversarial radius
  double sigma_max = 0.01;    ///< peak random-perturbation scale
  double eta = 0.1;           ///< adaptivity strength
  double beta_decay = 0.99;   ///< gradient-history decay
  SigmaSchedule schedule = SigmaSchedule::cosine;
  Distribution distribution = Distribution::filter_wise;
  bool elementwise_history = false;  ///< keep per-coordinate history instead of per-group

  void validate() const;
  bool operator==(const PerturbConfig&) const = default;
};

enum class PerturbKind { awp, rwp, arwp };

struct PerturbSample {
  std::vector<double> epsilon;
  double radius = 0.0;  ///< ||epsilon||_2
  PerturbKind kind = PerturbKind::rwp;
};

/// Decayed sums of squared perturbed gradients.
///
/// per_group_sum[j] holds S^(j) = sum_{i<t} beta^(t-i-1) ||g_i^(j)||^2 for the
/// next iteration t. per_coord_sum is empty unless element-wise history is on.
struct AdaptiveState {
  std::vector<double> per_group_sum;
  std::vector<double> per_coord_sum;
  std::uint64_t t = 1;

  static AdaptiveState fresh(const nn::FilterLayout& layout, bool elementwise = false);
  bool elementwise() const noexcept { return !per_coord_sum.empty(); }
  bool operator==(const AdaptiveState&) const = default;
};

inline constexpr double kZeroNormThreshold = 1e-12;

/// rho * g / ||g||, or zero when ||g|| <= 1e-12.
PerturbSample awp_direction(std::span<const double> grad, double rho);

/// Per-group standard deviation of the random perturbation: sigma * ||w^(j)||
/// (filter-wise, zero for groups with norm below 1e-12) or sigma (isotropic).
std::vector<double> rwp_group_stddev(const nn::ParamVector& w, double sigma,
                                     Distribution dist = Distribution::filter_wise);

/// Per-group standard deviation under adaptive scaling:
/// rwp_stddev / (1 + eta * S^(j))^(1/4).
std::vector<double> arwp_group_stddev(const nn::ParamVector& w, double sigma, double eta,
                                      const AdaptiveState& state, Distribution dist = Distribution::filter_wise);

/// Draws one random perturbation. The generator is advanced by exactly one
/// 64-bit draw; group j then reads from substream j of that key, so a group's
/// draws do not depend on how many other groups exist.
PerturbSample sample_rwp(const nn::ParamVector& w, double sigma, Rng& rng,
                         Distribution dist = Distribution::filter_wise);

/// Adaptive variant. With element-wise history, coordinate i in group j uses
/// the group scale divided by (1 + eta * s_i)^(1/4).
PerturbSample sample_arwp(const nn::ParamVector& w, double sigma, double eta, const AdaptiveState& state, Rng& rng,
                          Distribution dist = Distribution::filter_wise);

/// S <- beta * S + ||g^(j)||^2 per group (and element-wise when enabled); t += 1.
AdaptiveState update_adaptive_state(AdaptiveState state, std::span<const double> g, const nn::FilterLayout& layout,
                                    double beta_decay);

/// constant: sigma_max. cosine: sigma_max * (1 - cos(pi t / T)) / 2.
double sigma_at(std::size_t t, std::size_t total, const PerturbConfig& cfg);

std::string_view to_string(SigmaSchedule s);
std::string_view to_string(Distribution d);
std::string_view to_string(PerturbKind k);
SigmaSchedule schedule_from_string(std::string_view s);
Distribution distribution_from_string(std::string_view s);

}  // namespace perturbopt::perturb
