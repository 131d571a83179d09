#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace perturbopt::analysis {

/// out = H v for a symmetric operator H.
using OperatorFn = std::function<void(std::span<const double> v, std::span<double> out)>;

struct SpectrumResult {
  std::vector<double> ritz_values;   ///< ascending
  std::vector<double> ritz_weights;  ///< squared first components, sum to 1
  std::size_t iterations = 0;

  double dominant() const { return ritz_values.empty() ? 0.0 : ritz_values.back(); }
};

/// Lanczos tridiagonalisation with full reorthogonalisation from a random
/// unit start vector (seeded), followed by a dense eigendecomposition of the
/// tridiagonal matrix. Stops early when the next off-diagonal falls below
/// 1e-12 (invariant subspace found).
SpectrumResult lanczos_spectrum(const OperatorFn& op, std::size_t dim, std::size_t iters, std::uint64_t seed);

}  // namespace perturbopt::analysis
