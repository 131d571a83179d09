#include "perturbopt/analysis/landscape.hpp"

#include "perturbopt/analysis/parallel.hpp"
#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/perturb/perturb.hpp"

namespace perturbopt::analysis {

nn::ParamVector filter_normalized_direction(const nn::ParamVector& w, Rng& rng) {
  nn::ParamVector d = nn::ParamVector::zeros(w.layout);
  for (auto& x : d.values) x = rng.normal();
  for (std::size_t j = 0; j < w.layout.k(); ++j) {
    auto dj = w.layout.slice(d.span(), j);
    const double wn = nn::norm(w.group(j));
    const double dn = nn::norm(dj);
    const double scale = (wn < perturb::kZeroNormThreshold || dn == 0.0) ? 0.0 : wn / dn;
    for (auto& x : dj) x *= scale;
  }
  return d;
}

double grid_coordinate(double lo, double hi, std::size_t i, std::size_t n) {
  if (n < 2) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

LandscapeGrid landscape_grid(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                             std::size_t n1, std::size_t n2, std::pair<double, double> range, std::uint64_t seed,
                             unsigned workers) {
  Rng r1 = Rng::substream(seed, 0);
  Rng r2 = Rng::substream(seed, 1);
  const auto d1 = filter_normalized_direction(w, r1);
  const auto d2 = filter_normalized_direction(w, r2);
  return landscape_grid(obj, w, data, d1, d2, n1, n2, range, workers);
}

LandscapeGrid landscape_grid(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                             const nn::ParamVector& d1, const nn::ParamVector& d2, std::size_t n1, std::size_t n2,
                             std::pair<double, double> range, unsigned workers) {
  if (n1 < 2 || n2 < 2) throw ValidationError("landscape resolution must be >= 2 per axis");
  if (!(range.second > range.first)) throw ValidationError("landscape range must satisfy lo < hi");
  if (d1.size() != w.size() || d2.size() != w.size()) throw ValidationError("direction length mismatch");
  LandscapeGrid g;
  g.n1 = n1;
  g.n2 = n2;
  g.range = range;
  g.d1 = d1;
  g.d2 = d2;
  for (std::size_t i = 0; i < n1; ++i) g.a.push_back(grid_coordinate(range.first, range.second, i, n1));
  for (std::size_t j = 0; j < n2; ++j) g.b.push_back(grid_coordinate(range.first, range.second, j, n2));

  auto eval = [&](double a, double b) {
    std::vector<double> p(w.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = w.values[k] + a * d1.values[k] + b * d2.values[k];
    return obj.loss(p, data);
  };
  g.values.assign(n1 * n2, 0.0);
  parallel_for(n1 * n2, workers, [&](std::size_t idx) { g.values[idx] = eval(g.a[idx / n2], g.b[idx % n2]); });
  g.center_loss = eval(0.0, 0.0);
  return g;
}

}  // namespace perturbopt::analysis
