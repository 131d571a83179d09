#include <doctest.h>

#include <cmath>
#include <numeric>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/perturb/io.hpp"
#include "perturbopt/perturb/perturb.hpp"
#include "support.hpp"

using namespace perturbopt;
using namespace perturbopt::perturb;
using nn::FilterLayout;
using nn::ParamVector;

namespace {

/// Empirical per-group std of the drawn coordinates.
template <class Draw>
std::vector<double> group_std(const FilterLayout& layout, std::size_t draws, Draw&& draw) {
  std::vector<double> sq(layout.k(), 0.0);
  for (std::size_t s = 0; s < draws; ++s) {
    const auto eps = draw();
    for (std::size_t j = 0; j < layout.k(); ++j) {
      for (std::size_t i = 0; i < layout.groups[j].length; ++i) {
        const double x = eps[layout.groups[j].start + i];
        sq[j] += x * x;
      }
    }
  }
  std::vector<double> out(layout.k());
  for (std::size_t j = 0; j < layout.k(); ++j) {
    out[j] = std::sqrt(sq[j] / static_cast<double>(draws * layout.groups[j].length));
  }
  return out;
}

ParamVector three_groups() {
  FilterLayout layout{{{0, 2}, {2, 3}, {5, 1}}, 6};
  return {{0.5, -1.0, 2.0, 0.0, 1.0, -0.3}, layout};
}

}  // namespace

TEST_SUITE("perturb") {

TEST_CASE("awp direction examples") {
  const auto s = awp_direction(std::vector<double>{3.0, 4.0}, 0.05);
  CHECK(s.epsilon[0] == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(s.epsilon[1] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(s.radius == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(s.kind == PerturbKind::awp);

  const auto z = awp_direction(std::vector<double>{0.0, 0.0, 0.0}, 0.05);
  CHECK(z.epsilon == std::vector<double>(3, 0.0));
  CHECK(z.radius == 0.0);
}

TEST_CASE("awp norm and direction for random gradients") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testsupport::gaussian_vector(20, rng, 3.0);
    const auto s = awp_direction(g, 0.1);
    const double n = nn::norm(s.epsilon);
    CHECK(std::abs(n - 0.1) / 0.1 < 1e-12);
    const double cosine = nn::dot(g, s.epsilon) / (nn::norm(g) * n);
    CHECK(std::abs(cosine - 1.0) < 1e-12);
  }
}

TEST_CASE("zero sigma gives zero perturbation") {
  Rng rng(1);
  const auto s = sample_rwp(three_groups(), 0.0, rng);
  CHECK(std::all_of(s.epsilon.begin(), s.epsilon.end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("single group per-coordinate std") {
  const ParamVector w({1.0, 0.0}, FilterLayout::single(2));
  Rng rng(99);
  const auto sd = group_std(w.layout, 100000, [&] { return sample_rwp(w, 0.01, rng).epsilon; });
  CHECK(std::abs(sd[0] - 0.01) / 0.01 < 0.02);
}

TEST_CASE("rwp group std formula, zero-norm guard and isotropic law") {
  const auto w = three_groups();
  const auto sd = rwp_group_stddev(w, 0.1);
  CHECK(sd[0] == doctest::Approx(0.1 * std::sqrt(1.25)));
  CHECK(sd[1] == doctest::Approx(0.1 * std::sqrt(5.0)));
  CHECK(sd[2] == doctest::Approx(0.03));
  const ParamVector zero({0.0, 0.0, 1.0}, FilterLayout{{{0, 2}, {2, 1}}, 3});
  CHECK(rwp_group_stddev(zero, 0.1)[0] == 0.0);
  const auto iso = rwp_group_stddev(w, 0.1, Distribution::isotropic);
  CHECK(std::all_of(iso.begin(), iso.end(), [](double x) { return x == 0.1; }));
}

TEST_CASE("adaptive state recursion") {
  const FilterLayout layout{{{0, 2}, {2, 2}}, 4};
  auto s = AdaptiveState::fresh(layout);
  CHECK(s.per_group_sum == std::vector<double>{0.0, 0.0});
  CHECK(s.t == 1);
  const std::vector<double> g{0.6, 0.8, 0.0, 1.0};  // unit squared norm per group
  s = update_adaptive_state(s, g, layout, 0.99);
  CHECK(s.per_group_sum[0] == doctest::Approx(1.0));
  s = update_adaptive_state(s, g, layout, 0.99);
  CHECK(s.per_group_sum[0] == doctest::Approx(1.99).epsilon(1e-14));
  CHECK(s.per_group_sum[1] == doctest::Approx(1.99).epsilon(1e-14));
  CHECK(s.t == 3);

  auto m = AdaptiveState::fresh(layout);
  m = update_adaptive_state(m, g, layout, 0.0);
  m = update_adaptive_state(m, std::vector<double>{2.0, 0.0, 0.0, 0.0}, layout, 0.0);
  CHECK(m.per_group_sum == std::vector<double>{4.0, 0.0});
}

TEST_CASE("element-wise history tracks coordinates") {
  const FilterLayout layout{{{0, 2}}, 2};
  auto s = AdaptiveState::fresh(layout, true);
  s = update_adaptive_state(s, std::vector<double>{1.0, 2.0}, layout, 0.5);
  s = update_adaptive_state(s, std::vector<double>{1.0, 0.0}, layout, 0.5);
  CHECK(s.per_coord_sum == std::vector<double>{1.5, 2.0});
  CHECK(s.per_group_sum[0] == doctest::Approx(0.5 * 5.0 + 1.0));
}

TEST_CASE("arwp with empty history equals rwp") {
  const auto w = three_groups();
  const auto fresh = AdaptiveState::fresh(w.layout);
  Rng a(31);
  Rng b(31);
  for (int i = 0; i < 10; ++i) {
    const auto r = sample_rwp(w, 0.05, a);
    const auto q = sample_arwp(w, 0.05, 0.1, fresh, b);
    CHECK(r.epsilon == q.epsilon);
  }
}

TEST_CASE("arwp denominator") {
  const ParamVector w({3.0, 4.0}, FilterLayout::single(2));
  AdaptiveState s = AdaptiveState::fresh(w.layout);
  s.per_group_sum = {1.99};
  const double expect = 0.01 * 5.0 / 1.046417022231281;  // (1 + 0.1 * 1.99)^(1/4)
  CHECK(arwp_group_stddev(w, 0.01, 0.1, s)[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("arwp never exceeds rwp variance") {
  const auto w = three_groups();
  AdaptiveState s = AdaptiveState::fresh(w.layout);
  s.per_group_sum = {0.0, 2.5, 100.0};
  const auto r = rwp_group_stddev(w, 0.1);
  const auto a = arwp_group_stddev(w, 0.1, 0.1, s);
  CHECK(a[0] == r[0]);
  CHECK(a[1] < r[1]);
  CHECK(a[2] < r[2]);
  const auto eta0 = arwp_group_stddev(w, 0.1, 0.0, s);
  CHECK(eta0 == r);
}

TEST_CASE("scale equivariance of the filter-wise law") {
  auto w = three_groups();
  auto scaled = w;
  for (auto& x : scaled.values) x *= 3.0;
  const auto a = rwp_group_stddev(w, 0.02);
  const auto b = rwp_group_stddev(scaled, 0.02);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(b[j] == doctest::Approx(3.0 * a[j]).epsilon(1e-14));

  Rng r1(8);
  Rng r2(9);
  const auto s1 = group_std(w.layout, 40000, [&] { return sample_rwp(w, 0.02, r1).epsilon; });
  const auto s2 = group_std(w.layout, 40000, [&] { return sample_rwp(scaled, 0.02, r2).epsilon; });
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(s2[j] / s1[j] - 3.0) / 3.0 < 0.02);
}

TEST_CASE("sampling is deterministic") {
  const auto w = three_groups();
  Rng a(5);
  Rng b(5);
  const auto x = sample_rwp(w, 0.1, a);
  const auto y = sample_rwp(w, 0.1, b);
  CHECK(x.epsilon == y.epsilon);
  CHECK(x.radius == y.radius);
  CHECK(a == b);
}

TEST_CASE("sigma schedules") {
  PerturbConfig c;
  c.sigma_max = 0.02;
  c.schedule = SigmaSchedule::cosine;
  CHECK(sigma_at(0, 100, c) == 0.0);
  CHECK(sigma_at(100, 100, c) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(sigma_at(50, 100, c) == doctest::Approx(0.01).epsilon(1e-14));
  c.schedule = SigmaSchedule::constant;
  CHECK(sigma_at(7, 100, c) == 0.02);
}

TEST_CASE("config defaults and validation") {
  PerturbConfig c;
  CHECK(c.sigma_max == 0.01);
  CHECK(c.eta == 0.1);
  CHECK(c.beta_decay == 0.99);
  c.beta_decay = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = PerturbConfig{};
  c.sigma_max = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"schedule":"linear"})").get<PerturbConfig>(), ValidationError);
  const PerturbConfig d = nlohmann::json::parse(R"({"sigma_max":0.005,"distribution":"isotropic"})");
  CHECK(d.sigma_max == 0.005);
  CHECK(d.distribution == Distribution::isotropic);
  CHECK(d.eta == 0.1);
}

TEST_CASE("adaptive state files round trip") {
  const auto dir = testsupport::scratch_dir("asta");
  const FilterLayout layout{{{0, 2}, {2, 1}}, 3};
  auto s = AdaptiveState::fresh(layout, true);
  s = update_adaptive_state(s, std::vector<double>{0.1, 0.2, 0.3}, layout, 0.9);
  save_adaptive_state(dir / "s.asta", s);
  CHECK(load_adaptive_state(dir / "s.asta") == s);
  nn::write_container(dir / "w.pvec", nn::kParamMagic, std::vector<double>{1.0});
  CHECK_THROWS_AS(load_adaptive_state(dir / "w.pvec"), ValidationError);
}

}  // TEST_SUITE
