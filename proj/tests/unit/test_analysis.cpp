#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "perturbopt/analysis/bounds.hpp"
#include "perturbopt/analysis/io.hpp"
#include "perturbopt/analysis/lanczos.hpp"
#include "perturbopt/analysis/landscape.hpp"
#include "perturbopt/analysis/perturbed_loss.hpp"
#include "perturbopt/errors.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "support.hpp"

using namespace perturbopt;
using namespace perturbopt::analysis;
using nn::FilterLayout;
using nn::ParamVector;

namespace {

std::vector<double> dense_eigenvalues(const std::vector<double>& a, std::size_t d) {
  Eigen::MatrixXd m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = a[i * d + j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + d};
}

OperatorFn matrix_operator(const std::vector<double>& a, std::size_t d) {
  return [a, d](std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += a[i * d + j] * v[j];
      out[i] = s;
    }
  };
}

double quad_form(const nn::QuadraticObjective& q, std::span<const double> x, std::span<const double> y) {
  return nn::dot(x, q.apply(y));
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("zero perturbation reproduces the clean loss") {
  Rng rng(2);
  const std::size_t d = 5;
  nn::QuadraticObjective q(testsupport::random_symmetric(d, rng), d);
  const ParamVector w(testsupport::gaussian_vector(d, rng), FilterLayout::single(d));
  const double clean = q.loss(w.values, {});
  const auto r = expected_perturbed_loss(q, w, RwpSampler{0.0}, {}, 100, 1);
  CHECK(r.mean == clean);
  CHECK(r.std_error == 0.0);
  CHECK(expected_perturbed_loss(q, w, AwpSampler{0.0}, {}, 1, 1).mean == clean);
}

TEST_CASE("gaussian quadratic identity") {
  Rng rng(3);
  const std::size_t d = 6;
  auto a = testsupport::random_symmetric(d, rng);
  const FilterLayout layout{{{0, 2}, {2, 3}, {5, 1}}, d};
  nn::QuadraticObjective q(a, d, layout);
  const ParamVector w(testsupport::gaussian_vector(d, rng), layout);
  const double clean = q.loss(w.values, {});

  SUBCASE("isotropic") {
    const double sigma = 0.3;
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += a[i * d + i];
    const auto r = expected_perturbed_loss(q, w, RwpSampler{sigma, perturb::Distribution::isotropic}, {}, 10000, 7);
    CHECK(std::abs(r.mean - (clean + 0.5 * sigma * sigma * trace)) < 3.0 * r.std_error);
  }
  SUBCASE("filter-wise") {
    const double sigma = 0.2;
    const auto sd = perturb::rwp_group_stddev(w, sigma);
    double trace = 0.0;
    for (std::size_t j = 0; j < layout.k(); ++j) {
      for (std::size_t i = layout.groups[j].start; i < layout.groups[j].start + layout.groups[j].length; ++i) {
        trace += a[i * d + i] * sd[j] * sd[j];
      }
    }
    const auto r = expected_perturbed_loss(q, w, RwpSampler{sigma}, {}, 10000, 8);
    CHECK(std::abs(r.mean - (clean + 0.5 * trace)) < 3.0 * r.std_error);
  }
}

TEST_CASE("perturbed loss does not depend on the worker count") {
  Rng rng(4);
  const std::size_t d = 4;
  nn::QuadraticObjective q(testsupport::random_symmetric(d, rng), d);
  const ParamVector w(testsupport::gaussian_vector(d, rng), FilterLayout::single(d));
  const auto a = expected_perturbed_loss(q, w, RwpSampler{0.1}, {}, 500, 3, 1);
  const auto b = expected_perturbed_loss(q, w, RwpSampler{0.1}, {}, 500, 3, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.median == b.median);
}

TEST_CASE("radius sweep approaches the clean loss at small radii") {
  Rng rng(6);
  const std::size_t d = 4;
  nn::QuadraticObjective q(testsupport::random_symmetric(d, rng), d);
  const ParamVector w(testsupport::gaussian_vector(d, rng), FilterLayout::single(d));
  const double clean = q.loss(w.values, {});
  const auto s = radius_sweep(q, w, {}, {1e-9, 1e-3}, 50, 2);
  CHECK(s.awp_loss[0] == doctest::Approx(clean).epsilon(1e-7));
  CHECK(s.rwp_loss[0] == doctest::Approx(clean).epsilon(1e-7));
  CHECK(sigma_for_radius(w, 2.0) == doctest::Approx(2.0 / std::sqrt(4.0 * nn::squared_norm(w.values))));
  const auto g = log_grid(-3.0, 0.0, 4);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == 1.0);
}

TEST_CASE("filter-normalised directions") {
  Rng rng(10);
  const FilterLayout layout{{{0, 60}, {60, 50}, {110, 3}}, 113};
  const ParamVector w(testsupport::gaussian_vector(113, rng), layout);
  Rng a(1);
  Rng b(2);
  const auto d1 = filter_normalized_direction(w, a);
  const auto d2 = filter_normalized_direction(w, b);
  const auto nw = nn::group_squared_norms(w.values, layout);
  const auto nd = nn::group_squared_norms(d1.values, layout);
  for (std::size_t j = 0; j < layout.k(); ++j) CHECK(std::abs(std::sqrt(nd[j]) - std::sqrt(nw[j])) < 1e-12);
  const double cosine = nn::dot(d1.values, d2.values) / (nn::norm(d1.values) * nn::norm(d2.values));
  CHECK(std::abs(cosine) < 0.2);
  Rng c(3);
  const auto dz = filter_normalized_direction(ParamVector::zeros(layout), c);
  CHECK(nn::squared_norm(dz.values) == 0.0);
}

TEST_CASE("landscape grid on a quadratic") {
  Rng rng(12);
  const std::size_t d = 5;
  nn::QuadraticObjective q(testsupport::random_symmetric(d, rng), d);
  const ParamVector w(testsupport::gaussian_vector(d, rng), FilterLayout::single(d));
  const auto g = landscape_grid(q, w, {}, 7, 5, {-1.0, 1.0}, 4);
  CHECK(g.center_loss == q.loss(w.values, {}));
  CHECK(g.at(3, 2) == g.center_loss);
  CHECK(g.a.front() == -1.0);
  CHECK(g.a.back() == 1.0);
  CHECK(grid_coordinate(-1.0, 1.0, 3, 7) == 0.0);

  const auto grad = q.apply(w.values);
  const double l0 = q.loss(w.values, {});
  const double g1 = nn::dot(grad, g.d1.values);
  const double g2 = nn::dot(grad, g.d2.values);
  const double h11 = quad_form(q, g.d1.values, g.d1.values);
  const double h12 = quad_form(q, g.d1.values, g.d2.values);
  const double h22 = quad_form(q, g.d2.values, g.d2.values);
  for (std::size_t i = 0; i < g.n1; ++i) {
    for (std::size_t j = 0; j < g.n2; ++j) {
      const double a = g.a[i];
      const double b = g.b[j];
      const double expect = l0 + a * g1 + b * g2 + 0.5 * (a * a * h11 + 2.0 * a * b * h12 + b * b * h22);
      CHECK(std::abs(g.at(i, j) - expect) < 1e-10);
    }
  }
  // Antisymmetric part along one axis is linear in the gradient.
  CHECK(std::abs((g.at(6, 2) - g.at(0, 2)) - 2.0 * g1) < 1e-10);

  const auto same = landscape_grid(q, w, {}, 7, 5, {-1.0, 1.0}, 4, 3);
  CHECK(same.values == g.values);
}

TEST_CASE("lanczos on small known spectra") {
  const auto diag = matrix_operator({1, 0, 0, 0, 2, 0, 0, 0, 3}, 3);
  const auto s = lanczos_spectrum(diag, 3, 3, 1);
  REQUIRE(s.ritz_values.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(s.ritz_values[i] - (i + 1.0)) < 1e-8);
  double wsum = 0.0;
  for (const double x : s.ritz_weights) wsum += x;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

  const auto id = lanczos_spectrum(matrix_operator({1, 0, 0, 0, 1, 0, 0, 0, 1}, 3), 3, 3, 2);
  CHECK(id.iterations == 1);
  REQUIRE(id.ritz_values.size() == 1);
  CHECK(id.ritz_values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(id.ritz_weights[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lanczos against a dense eigensolve") {
  Rng rng(30);
  for (const std::size_t d : {5u, 17u, 40u}) {
    const auto a = testsupport::random_symmetric(d, rng);
    const auto exact = dense_eigenvalues(a, d);
    const auto op = matrix_operator(a, d);
    const auto s = lanczos_spectrum(op, d, d, 9);
    REQUIRE(s.ritz_values.size() == d);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(s.ritz_values[i] - exact[i]) < 1e-8);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= d; ++k) {
      const double dom = lanczos_spectrum(op, d, k, 9).dominant();
      CHECK(dom <= exact.back() + 1e-6);
      CHECK(dom >= prev - 1e-10);
      prev = dom;
    }
  }
}

TEST_CASE("convergence bounds") {
  TheoryConstants c;
  c.beta = 1.0;
  c.M = 0.0;
  c.d = 10;
  c.L0_minus_Lstar = 1.0;
  CHECK(rwp_bound(c, 0.1, 100, 0.1) == doctest::Approx(2.2046051701859883).epsilon(1e-14));
  CHECK(mrwp_bound(c, 0.1, 100, 0.1, 0.5) == doctest::Approx(2.0511512925464968).epsilon(1e-14));
  CHECK(mrwp_bound(c, 0.1, 100, 0.1, 1.0) == rwp_bound(c, 0.1, 100, 0.1));
  CHECK(mrwp_bound(c, 0.07, 12345, 0.37, 1.0) == rwp_bound(c, 0.07, 12345, 0.37));

  TheoryConstants noisy = c;
  noisy.M = 2.0;
  CHECK(rwp_bound(noisy, 0.1, 100, 0.0) ==
        doctest::Approx(2.0 / (0.1 * 10.0) + 2.0 * 2.0 * 0.1 * std::log(100.0) / 10.0).epsilon(1e-14));
  CHECK(rwp_bound(c, 0.1, 1000000000000ULL, 0.1) == doctest::Approx(bound_floor(c, 0.1)).epsilon(1e-3));
  CHECK(bound_floor(c, 0.1) == doctest::Approx(0.2));

  CHECK(bound_floor(c, 0.1, 0.5) == doctest::Approx(bound_floor(c, 0.1) / 4.0).epsilon(1e-15));
  CHECK(variance_factor(0.5) == 0.5);
  CHECK(bound_floor(c, 0.1, 0.0) == 0.0);
  CHECK(variance_factor(0.0) == 1.0);

  CHECK(rwp_bound(c, 0.1, 100, 0.2) > rwp_bound(c, 0.1, 100, 0.1));
  TheoryConstants wide = c;
  wide.d = 20;
  CHECK(rwp_bound(wide, 0.1, 100, 0.1) > rwp_bound(c, 0.1, 100, 0.1));
  CHECK(mrwp_bound(wide, 0.1, 100, 0.1, 0.5) > mrwp_bound(c, 0.1, 100, 0.1, 0.5));

  CHECK_THROWS_AS(rwp_bound(c, 1.0, 100, 0.1), ValidationError);
  CHECK_THROWS_AS(rwp_bound(c, 0.1, 0, 0.1), ValidationError);
}

TEST_CASE("smoothness comparison chain") {
  TheoryConstants c;
  c.alpha = 1.0;
  c.beta = 1.0;
  const auto r = smoothness_report(c, 1.5, 0.75);
  CHECK(r.window_applicable);
  REQUIRE(r.lambda_window.has_value());
  CHECK(r.lambda_window->first == doctest::Approx(0.5));
  CHECK(r.lambda_window->second == 1.0);
  CHECK(r.lambda_in_window);
  CHECK(r.mrwp_smoothness_scaled == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(r.rwp_smoothness == doctest::Approx(0.6666666666666666).epsilon(1e-15));
  REQUIRE(r.scaled_below_rwp.has_value());
  CHECK(*r.scaled_below_rwp);

  CHECK(smoothness_report(c, 1e9, 0.5).rwp_smoothness < 1e-8);
  const auto one = smoothness_report(c, 0.7, 1.0);
  CHECK(one.mrwp_smoothness == one.rwp_smoothness);
  CHECK_FALSE(smoothness_report(c, 3.0, 0.75).window_applicable);
  CHECK_THROWS_AS(smoothness_report(c, 0.0, 0.5), ValidationError);
}

TEST_CASE("quadratic theory constants") {
  nn::QuadraticObjective q({2.0, 0.0, 0.0, 0.5}, 2);
  const auto c = quadratic_constants(q, std::vector<double>{1.0, 1.0}, 3.0);
  CHECK(c.beta == doctest::Approx(2.0));
  CHECK(c.alpha == doctest::Approx(6.0));
  CHECK(c.M == 0.0);
  CHECK(c.L0_minus_Lstar == doctest::Approx(1.25));
}

TEST_CASE("generalisation gap") {
  nn::ModelSpec m;
  m.layers = {nn::DenseLayer{1, 2, nn::Activation::identity, true}};
  nn::ModelObjective obj(m);
  const ParamVector w({1.0, -1.0, 0.0, 0.0}, nn::build_layout(m));
  nn::Batch train;
  train.inputs = nn::Tensor({2, 1}, {1.0, -1.0});
  train.labels = {0, 1};
  CHECK(generalization_gap(obj, w, train, train) == 0.0);
  nn::Batch test = train;
  test.labels = {0, 0};
  CHECK(generalization_gap(obj, w, train, test) == 0.5);
}

TEST_CASE("csv and json writers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  SpectrumResult s;
  s.ritz_values = {1.0, 2.5};
  s.ritz_weights = {0.25, 0.75};
  CHECK(spectrum_csv(s) == "ritz_value,weight\n1,0.25\n2.5,0.75\n");
  TheoryConstants c;
  c.d = 10;
  c.L0_minus_Lstar = 1.0;
  const auto j = bound_report(c, 0.1, 100, 0.1, 0.5);
  CHECK(j["rwp_bound"].get<double>() == doctest::Approx(2.2046051701859883));
  CHECK(j["variance_factor"].get<double>() == 0.5);
  CHECK(j.contains("smoothness"));
  const nlohmann::json cj = c;
  CHECK(cj.get<TheoryConstants>().d == 10);
}

}  // TEST_SUITE
