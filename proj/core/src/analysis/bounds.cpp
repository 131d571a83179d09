#include "perturbopt/analysis/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"

namespace perturbopt::analysis {

void TheoryConstants::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be finite and > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and > 0");
  if (!(M >= 0.0) || !std::isfinite(M)) throw ValidationError("M must be finite and >= 0");
  if (d < 1) throw ValidationError("d must be >= 1");
  if (!(L0_minus_Lstar >= 0.0)) throw ValidationError("L0_minus_Lstar must be >= 0");
}

namespace {

void check_bound_inputs(const TheoryConstants& c, double gamma0, std::size_t T, double sigma) {
  c.validate();
  if (!(gamma0 > 0.0)) throw ValidationError("gamma0 must be > 0");
  if (!(gamma0 * c.beta < 1.0)) {
    throw ValidationError("step size hypothesis violated: gamma0 = " + std::to_string(gamma0) +
                          " must be < 1/beta = " + std::to_string(1.0 / c.beta));
  }
  if (T < 1) throw ValidationError("T must be >= 1");
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be >= 0");
}

}  // namespace

double variance_factor(double lambda) { return 2.0 * lambda * lambda - 2.0 * lambda + 1.0; }

double rwp_bound(const TheoryConstants& c, double gamma0, std::size_t T, double sigma) {
  check_bound_inputs(c, gamma0, T, sigma);
  const double b = c.beta;
  const double d = static_cast<double>(c.d);
  const double s2 = sigma * sigma;
  const double sqrt_t = std::sqrt(static_cast<double>(T));
  const double log_t = std::log(static_cast<double>(T));
  const double descent = 2.0 * c.L0_minus_Lstar / (gamma0 * sqrt_t);
  const double variance = (2.0 * b * c.M + b * b * b * s2 * d) * gamma0 * log_t / sqrt_t;
  const double floor = 2.0 * (b * b) * s2 * d;
  return descent + variance + floor;
}

double mrwp_bound(const TheoryConstants& c, double gamma0, std::size_t T, double sigma, double lambda) {
  check_bound_inputs(c, gamma0, T, sigma);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  const double b = c.beta;
  const double d = static_cast<double>(c.d);
  const double s2 = sigma * sigma;
  const double l2 = lambda * lambda;
  const double sqrt_t = std::sqrt(static_cast<double>(T));
  const double log_t = std::log(static_cast<double>(T));
  const double descent = 2.0 * c.L0_minus_Lstar / (gamma0 * sqrt_t);
  const double variance =
      (2.0 * b * c.M * variance_factor(lambda) + b * b * b * l2 * s2 * d) * gamma0 * log_t / sqrt_t;
  const double floor = 2.0 * (b * b) * l2 * s2 * d;
  return descent + variance + floor;
}

double bound_floor(const TheoryConstants& c, double sigma, double lambda) {
  return 2.0 * (c.beta * c.beta) * (lambda * lambda) * (sigma * sigma) * static_cast<double>(c.d);
}

SmoothnessReport smoothness_report(const TheoryConstants& c, double sigma, double lambda) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  const double a = c.alpha;
  const double b = c.beta;
  SmoothnessReport r;
  r.rwp_smoothness = std::min(a / sigma, b);
  r.mrwp_smoothness = std::min(lambda * a / sigma + (1.0 - lambda) * b, b);
  r.mrwp_smoothness_scaled = std::min(lambda * lambda * a / sigma + (1.0 - lambda) * b, b);
  r.window_applicable = a < b * sigma && b * sigma < 2.0 * a;
  if (r.window_applicable) {
    r.lambda_window = std::make_pair((b * sigma - a) / a, 1.0);
    r.lambda_in_window = lambda > r.lambda_window->first && lambda < r.lambda_window->second;
    if (r.lambda_in_window) r.scaled_below_rwp = r.mrwp_smoothness_scaled < a / sigma;
  }
  return r;
}

double max_eigenvalue(const std::vector<double>& a, std::size_t d) {
  if (a.size() != d * d || d == 0) throw ValidationError("matrix must be d x d");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      a.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

TheoryConstants quadratic_constants(const nn::QuadraticObjective& q, std::span<const double> w0, double radius) {
  TheoryConstants c;
  c.d = q.dim();
  c.beta = max_eigenvalue(q.matrix(), c.d);
  c.alpha = c.beta * radius;
  c.M = 0.0;
  c.L0_minus_Lstar = q.loss(w0, nn::Batch{});
  return c;
}

double generalization_gap(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& train,
                          const nn::Batch& test) {
  if (!obj.is_classifier()) throw ValidationError("generalization gap requires a classification objective");
  return obj.accuracy(w.span(), train) - obj.accuracy(w.span(), test);
}

}  // namespace perturbopt::analysis
