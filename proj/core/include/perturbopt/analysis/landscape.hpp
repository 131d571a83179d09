#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/objective.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::analysis {

/// Gaussian direction rescaled so that every group has the norm of the
/// corresponding weight group. Groups of w with norm below 1e-12 get zeros.
nn::ParamVector filter_normalized_direction(const nn::ParamVector& w, Rng& rng);

struct LandscapeGrid {
  std::size_t n1 = 50;
  std::size_t n2 = 50;
  std::pair<double, double> range{-1.0, 1.0};
  std::vector<double> a;       ///< axis-1 coordinates, length n1
  std::vector<double> b;       ///< axis-2 coordinates, length n2
  std::vector<double> values;  ///< row-major n1 x n2, values[i * n2 + j] = L(w + a_i d1 + b_j d2)
  double center_loss = 0.0;    ///< L(w + 0 d1 + 0 d2), always evaluated
  nn::ParamVector d1;
  nn::ParamVector d2;

  double at(std::size_t i, std::size_t j) const { return values[i * n2 + j]; }
};

/// Grid coordinate lo + (hi - lo) * i / (n - 1); exact at the endpoints and,
/// for symmetric ranges with odd n, exactly zero at the middle.
double grid_coordinate(double lo, double hi, std::size_t i, std::size_t n);

LandscapeGrid landscape_grid(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                             std::size_t n1, std::size_t n2, std::pair<double, double> range, std::uint64_t seed,
                             unsigned workers = 1);

/// Same grid over caller-supplied directions.
LandscapeGrid landscape_grid(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                             const nn::ParamVector& d1, const nn::ParamVector& d2, std::size_t n1, std::size_t n2,
                             std::pair<double, double> range, unsigned workers = 1);

}  // namespace perturbopt::analysis
