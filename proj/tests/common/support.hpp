#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/model.hpp"
#include "perturbopt/nn/objective.hpp"
#include "perturbopt/rng.hpp"

namespace testsupport {

using perturbopt::Rng;
namespace nn = perturbopt::nn;

inline std::vector<double> gaussian_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

/// Batch with standard normal inputs of the given per-example shape. Labels
/// in [0, classes) for classification, Gaussian targets otherwise.
inline nn::Batch random_batch(std::size_t n, std::vector<std::size_t> example_shape, std::size_t outputs,
                              bool classification, Rng& rng) {
  std::vector<std::size_t> shape{n};
  shape.insert(shape.end(), example_shape.begin(), example_shape.end());
  nn::Batch b;
  b.inputs = nn::Tensor(shape, gaussian_vector(nn::shape_product(shape), rng));
  if (classification) {
    for (std::size_t i = 0; i < n; ++i) b.labels.push_back(static_cast<std::int32_t>(rng.below(outputs)));
  } else {
    b.targets = nn::Tensor({n, outputs}, gaussian_vector(n * outputs, rng));
  }
  return b;
}

/// Central finite-difference gradient of f at w.
template <class F>
std::vector<double> fd_gradient(F&& f, std::vector<double> w, double h) {
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double orig = w[i];
    w[i] = orig + h;
    const double up = f(w);
    w[i] = orig - h;
    const double down = f(w);
    w[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Largest coordinate-wise relative error, with differences below `floor`
/// in magnitude measured absolutely.
inline double max_rel_error(std::span<const double> a, std::span<const double> b, double floor = 1e-3) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("perturbopt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Dense symmetric d x d matrix with Gaussian entries.
inline std::vector<double> random_symmetric(std::size_t d, Rng& rng) {
  std::vector<double> a(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double x = rng.normal();
      a[i * d + j] = x;
      a[j * d + i] = x;
    }
  }
  return a;
}

}  // namespace testsupport
