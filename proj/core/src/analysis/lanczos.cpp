#include "perturbopt/analysis/lanczos.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::analysis {

namespace {

constexpr double kBreakdown = 1e-12;

void orthogonalize(std::vector<double>& w, const std::vector<std::vector<double>>& basis) {
  // Two passes of classical Gram-Schmidt keep the basis orthogonal to
  // working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) nn::axpy(-nn::dot(q, w), q, w);
  }
}

}  // namespace

SpectrumResult lanczos_spectrum(const OperatorFn& op, std::size_t dim, std::size_t iters, std::uint64_t seed) {
  if (dim == 0 || iters < 1 || iters > dim) {
    throw ValidationError("lanczos requires 1 <= iters <= dim, got iters=" + std::to_string(iters) +
                          " dim=" + std::to_string(dim));
  }
  Rng rng(seed);
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  const double vn = nn::norm(v);
  for (auto& x : v) x /= vn;

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> w(dim);
  for (std::size_t k = 0; k < iters; ++k) {
    basis.push_back(v);
    op(basis.back(), w);
    const double a = nn::dot(basis.back(), w);
    alpha.push_back(a);
    orthogonalize(w, basis);
    if (k + 1 == iters) break;
    const double b = nn::norm(w);
    if (b < kBreakdown) break;
    beta.push_back(b);
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / b;
  }

  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                              : Eigen::VectorXd(0);
  SpectrumResult out;
  out.iterations = alpha.size();
  if (m == 1) {
    out.ritz_values = {alpha[0]};
    out.ritz_weights = {1.0};
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ValidationError("tridiagonal eigensolve failed");
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    out.ritz_values.push_back(es.eigenvalues()(i));
    const double c = es.eigenvectors()(0, i);
    out.ritz_weights.push_back(c * c);
    total += c * c;
  }
  for (auto& wgt : out.ritz_weights) wgt /= total;
  return out;
}

}  // namespace perturbopt::analysis
