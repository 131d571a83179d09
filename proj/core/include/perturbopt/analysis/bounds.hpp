#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/objective.hpp"

namespace perturbopt::analysis {

/// Problem constants entering the convergence and smoothness statements.
struct TheoryConstants {
  double alpha = 1.0;           ///< Lipschitz constant of L
  double beta = 1.0;            ///< smoothness constant of L
  double M = 0.0;               ///< bound on mini-batch gradient variance
  std::size_t d = 1;            ///< parameter count
  double L0_minus_Lstar = 0.0;  ///< initial optimality gap

  void validate() const;
};

/// Average squared-gradient bound for SGD on randomly perturbed weights with
/// step gamma0 / sqrt(t):
///   2 gap / (gamma0 sqrt T) + (2 beta M + beta^3 sigma^2 d) gamma0 log T / sqrt T + 2 beta^2 sigma^2 d.
/// Throws ValidationError unless gamma0 < 1 / beta and T >= 1.
double rwp_bound(const TheoryConstants& c, double gamma0, std::size_t T, double sigma);

/// Mixed-gradient counterpart: the gradient-variance term is scaled by
/// (2 lambda^2 - 2 lambda + 1) and both perturbation terms by lambda^2.
/// Equals rwp_bound exactly at lambda = 1.
double mrwp_bound(const TheoryConstants& c, double gamma0, std::size_t T, double sigma, double lambda);

/// The constant term 2 beta^2 lambda^2 sigma^2 d that the bound approaches as T grows.
double bound_floor(const TheoryConstants& c, double sigma, double lambda = 1.0);

/// 2 lambda^2 - 2 lambda + 1
double variance_factor(double lambda);

struct SmoothnessReport {
  double rwp_smoothness = 0.0;   ///< min(alpha / sigma, beta)
  double mrwp_smoothness = 0.0;  ///< min(lambda alpha / sigma + (1 - lambda) beta, beta)
  bool window_applicable = false;  ///< alpha < beta sigma < 2 alpha
  std::optional<std::pair<double, double>> lambda_window;  ///< ((beta sigma - alpha) / alpha, 1)
  bool lambda_in_window = false;
  /// Mixed smoothness at perturbation scale sigma / lambda:
  /// min(lambda^2 alpha / sigma + (1 - lambda) beta, beta).
  double mrwp_smoothness_scaled = 0.0;
  /// Set when applicable and lambda is in the window: whether
  /// mrwp_smoothness_scaled < alpha / sigma.
  std::optional<bool> scaled_below_rwp;
};

/// Throws ValidationError unless sigma > 0 and lambda in [0, 1].
SmoothnessReport smoothness_report(const TheoryConstants& c, double sigma, double lambda);

/// Constants of L(w) = 0.5 w^T A w restricted to the ball ||w|| <= radius:
/// beta = lambda_max(A), alpha = beta * radius, M = 0,
/// gap = L(w0) - 0.
TheoryConstants quadratic_constants(const nn::QuadraticObjective& q, std::span<const double> w0, double radius);

/// Largest eigenvalue of a symmetric matrix via dense eigensolve.
double max_eigenvalue(const std::vector<double>& a, std::size_t d);

/// train accuracy minus test accuracy.
double generalization_gap(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& train,
                          const nn::Batch& test);

}  // namespace perturbopt::analysis
