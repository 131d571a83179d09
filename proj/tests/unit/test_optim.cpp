#include <doctest.h>

#include <cmath>
#include <set>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/optim/batching.hpp"
#include "perturbopt/optim/io.hpp"
#include "perturbopt/optim/optimizer.hpp"
#include "perturbopt/optim/steps.hpp"
#include "support.hpp"

using namespace perturbopt;
using namespace perturbopt::optim;
using nn::FilterLayout;
using nn::ParamVector;

namespace {

/// L(w) = c . w, constant gradient c.
class LinearObjective final : public nn::Objective {
 public:
  explicit LinearObjective(std::vector<double> c) : c_(std::move(c)), layout_(FilterLayout::single(c_.size())) {}
  const FilterLayout& layout() const noexcept override { return layout_; }
  double loss(std::span<const double> w, const nn::Batch&) const override { return nn::dot(c_, w); }
  double loss_and_grad(std::span<const double> w, const nn::Batch& b, std::span<double> g) const override {
    std::copy(c_.begin(), c_.end(), g.begin());
    return loss(w, b);
  }

 private:
  std::vector<double> c_;
  FilterLayout layout_;
};

nn::QuadraticObjective half_square() { return nn::QuadraticObjective({1.0}, 1); }

ParamVector scalar(double x) { return {{x}, FilterLayout::single(1)}; }

RandomPerturbation perturbation(double sigma) {
  RandomPerturbation rp;
  rp.sigma = sigma;
  return rp;
}

struct Problem {
  nn::ModelSpec model = nn::make_mlp({3, 5, 3}, nn::Activation::tanh, nn::LossHead::softmax_cross_entropy);
  nn::ModelObjective obj{model};
  nn::Batch b1;
  nn::Batch b2;
  ParamVector w;

  Problem() {
    Rng rng(12);
    b1 = testsupport::random_batch(8, {3}, 3, true, rng);
    b2 = testsupport::random_batch(8, {3}, 3, true, rng);
    w = nn::init_params(model, 4);
  }
};

}  // namespace

TEST_SUITE("optim") {

TEST_CASE("learning-rate schedules") {
  OptimizerConfig c;
  c.gamma0 = 0.2;
  c.lr_schedule = LrSchedule::inverse_sqrt;
  CHECK(lr_at(1, 100, c) == 0.2);
  CHECK(lr_at(4, 100, c) == 0.1);
  c.lr_schedule = LrSchedule::cosine_decay;
  CHECK(lr_at(1, 100, c) == 0.2);
  CHECK(lr_at(1000, 1000, c) == doctest::Approx(0.2 * (1.0 + std::cos(M_PI * 999.0 / 1000.0)) / 2.0));
  CHECK(lr_at(1000, 1000, c) < 1e-5);
  c.lr_schedule = LrSchedule::constant;
  CHECK(lr_at(37, 100, c) == 0.2);
  CHECK_THROWS_AS(lr_at(0, 100, c), ValidationError);
}

TEST_CASE("sgd on a scalar quadratic") {
  const auto q = half_square();
  Velocity v;
  CHECK(step_sgd(q, scalar(1.0), {}, 0.1, {}, v).new_w.values[0] == doctest::Approx(0.9).epsilon(1e-15));
  Velocity v0;
  CHECK(step_sgd(q, scalar(0.0), {}, 0.1, {}, v0).new_w.values[0] == 0.0);
}

TEST_CASE("momentum buffer recursion") {
  const LinearObjective lin({2.0});
  Velocity v;
  const UpdateRule rule{0.9, 0.0};
  const auto w1 = step_sgd(lin, scalar(0.0), {}, 0.1, rule, v).new_w;
  const auto w2 = step_sgd(lin, w1, {}, 0.1, rule, v).new_w;
  CHECK(w1.values[0] == doctest::Approx(-0.2));
  CHECK(w2.values[0] - w1.values[0] == doctest::Approx(-0.1 * 1.9 * 2.0).epsilon(1e-14));
}

TEST_CASE("sam hand computation and reductions") {
  const auto q = half_square();
  Velocity v;
  const auto r = step_sam(q, scalar(1.0), {}, {}, 0.1, 0.1, 0, {}, v);
  CHECK(r.new_w.values[0] == doctest::Approx(0.89).epsilon(1e-15));
  CHECK(*r.epsilon_radius == doctest::Approx(0.1));

  Problem p;
  Velocity a;
  Velocity b;
  const auto sam0 = step_sam(p.obj, p.w, p.b1, p.b1, 0.1, 0.0, 0, {}, a);
  const auto sgd = step_sgd(p.obj, p.w, p.b1, 0.1, {}, b);
  CHECK(sam0.new_w == sgd.new_w);

  Velocity c;
  Velocity d;
  const auto full = step_sam(p.obj, p.w, p.b1, p.b1, 0.1, 0.05, 8, {}, c);
  const auto whole = step_sam(p.obj, p.w, p.b1, p.b1, 0.1, 0.05, 0, {}, d);
  CHECK(full.new_w == whole.new_w);

  Velocity e;
  const auto chunked = step_sam(p.obj, p.w, p.b1, p.b1, 0.1, 0.05, 2, {}, e);
  CHECK(chunked.new_w != whole.new_w);
}

TEST_CASE("sam fixed point on a centred quadratic") {
  // At the minimiser the attack gradient is zero, so eps = 0 and nothing moves.
  const auto q = half_square();
  Velocity v;
  CHECK(step_sam(q, scalar(0.0), {}, {}, 0.1, 0.1, 0, {}, v).new_w.values[0] == 0.0);
  // Off the minimiser the step equals -lr * grad L(w + eps) with eps = rho sign(w).
  Velocity u;
  const double w = -2.0;
  CHECK(step_sam(q, scalar(w), {}, {}, 0.1, 0.3, 0, {}, u).new_w.values[0] ==
        doctest::Approx(w - 0.1 * (w - 0.3)).epsilon(1e-15));
}

TEST_CASE("rwp closed form on a scalar quadratic") {
  const auto q = half_square();
  Rng rng(77);
  Rng replay(77);
  Velocity v;
  const auto w = scalar(1.0);
  const auto r = step_rwp(q, w, {}, 0.1, perturbation(0.3), rng, nullptr, {}, v);
  const double eps = perturb::sample_rwp(w, 0.3, replay).epsilon[0];
  CHECK(eps != 0.0);
  CHECK(r.new_w.values[0] == 1.0 - 0.1 * (1.0 + eps));
  CHECK(r.loss_main == 0.5);
  CHECK(*r.loss_perturbed == doctest::Approx(0.5 * (1.0 + eps) * (1.0 + eps)));
}

TEST_CASE("rwp with zero sigma is sgd") {
  Problem p;
  Rng rng(1);
  Velocity a;
  Velocity b;
  const auto r = step_rwp(p.obj, p.w, p.b1, 0.1, perturbation(0.0), rng, nullptr, {}, a);
  const auto s = step_sgd(p.obj, p.w, p.b1, 0.1, {}, b);
  CHECK(r.new_w == s.new_w);
}

TEST_CASE("arwp with fresh state equals rwp") {
  Problem p;
  Rng r1(3);
  Rng r2(3);
  Velocity a;
  Velocity b;
  auto state = perturb::AdaptiveState::fresh(p.w.layout);
  const auto x = step_rwp(p.obj, p.w, p.b1, 0.1, perturbation(0.05), r1, nullptr, {}, a);
  const auto y = step_rwp(p.obj, p.w, p.b1, 0.1, perturbation(0.05), r2, &state, {}, b);
  CHECK(x.new_w == y.new_w);
  CHECK(state.t == 2);
  CHECK(std::any_of(state.per_group_sum.begin(), state.per_group_sum.end(), [](double s) { return s > 0.0; }));
}

TEST_CASE("mixed step limits") {
  Problem p;
  const BatchPair pair{p.b1, p.b2};
  SUBCASE("lambda 0 is sgd on the clean batch") {
    Rng rng(5);
    Velocity a;
    Velocity b;
    const auto m = step_mrwp(p.obj, p.w, pair, 0.1, 0.0, perturbation(0.1), rng, nullptr, {}, a);
    const auto s = step_sgd(p.obj, p.w, p.b2, 0.1, {}, b);
    CHECK(m.new_w == s.new_w);
  }
  SUBCASE("lambda 1 is rwp on the perturbed batch") {
    Rng r1(5);
    Rng r2(5);
    Velocity a;
    Velocity b;
    const auto m = step_mrwp(p.obj, p.w, pair, 0.1, 1.0, perturbation(0.1), r1, nullptr, {}, a);
    const auto r = step_rwp(p.obj, p.w, p.b1, 0.1, perturbation(0.1), r2, nullptr, {}, b);
    CHECK(m.new_w == r.new_w);
    CHECK(r1 == r2);
  }
}

TEST_CASE("mixed step closed form at lambda one half") {
  const auto q = half_square();
  Rng rng(8);
  Rng replay(8);
  Velocity v;
  const auto w = scalar(1.0);
  const auto r = step_mrwp(q, w, {}, 0.1, 0.5, perturbation(0.2), rng, nullptr, {}, v);
  const double eps = perturb::sample_rwp(w, 0.2, replay).epsilon[0];
  CHECK(r.new_w.values[0] == doctest::Approx(1.0 - 0.1 * (1.0 + 0.5 * eps)).epsilon(1e-15));
}

TEST_CASE("mixed step is independent of the worker count") {
  Problem p;
  const BatchPair pair{p.b1, p.b2};
  Rng r1(6);
  Rng r2(6);
  Velocity a;
  Velocity b;
  auto s1 = perturb::AdaptiveState::fresh(p.w.layout);
  auto s2 = s1;
  auto w1 = p.w;
  auto w2 = p.w;
  for (int i = 0; i < 20; ++i) {
    const auto x = step_mrwp(p.obj, w1, pair, 0.1, 0.5, perturbation(0.1), r1, &s1, {0.9, 1e-4}, a, 1);
    const auto y = step_mrwp(p.obj, w2, pair, 0.1, 0.5, perturbation(0.1), r2, &s2, {0.9, 1e-4}, b, 2);
    CHECK(x.new_w == y.new_w);
    CHECK(x.loss_main == y.loss_main);
    CHECK(x.loss_perturbed == y.loss_perturbed);
    w1 = x.new_w;
    w2 = y.new_w;
  }
  CHECK(s1 == s2);
}

TEST_CASE("weight decay on the combined gradient") {
  const LinearObjective lin({0.0});
  Velocity v;
  const auto r = step_sgd(lin, scalar(2.0), {}, 0.1, {0.0, 0.5}, v);
  CHECK(r.new_w.values[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

TEST_CASE("batch pairing") {
  Rng rng(2);
  const auto data = testsupport::random_batch(40, {2}, 2, true, rng);
  SUBCASE("same") {
    EpochStream s(40, Rng(1));
    const auto p = next_index_pair(s, 8, BatchPairing::same);
    CHECK(p.b1 == p.b2);
  }
  SUBCASE("different pairs are disjoint and an epoch never repeats") {
    EpochStream s(40, Rng(1));
    s.start_epoch();
    std::set<std::size_t> seen;
    for (int k = 0; k < 5; ++k) {
      const auto p = next_index_pair(s, 4, BatchPairing::different);
      for (auto i : p.b1) CHECK(seen.insert(i).second);
      for (auto i : p.b2) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == 40);
    CHECK(s.epoch() == 1);
  }
  SUBCASE("examples per step") {
    CHECK(examples_per_step(16, BatchPairing::same) == 16);
    CHECK(examples_per_step(16, BatchPairing::different) == 32);
    Rng r(3);
    const auto p = make_batch_pair(data, 20, BatchPairing::different, r);
    CHECK(p.b1.size() == 20);
    CHECK(p.b2.size() == 20);
    CHECK_THROWS_AS(make_batch_pair(data, 21, BatchPairing::different, r), ValidationError);
  }
}

TEST_CASE("gradient evaluation accounting") {
  CHECK(gradient_evaluations_per_step(Method::sgd) == 1);
  CHECK(gradient_evaluations_per_step(Method::rwp) == 1);
  CHECK(gradient_evaluations_per_step(Method::arwp) == 1);
  CHECK(gradient_evaluations_per_step(Method::sam) == 2);
  CHECK(gradient_evaluations_per_step(Method::mrwp) == 2);
  CHECK(gradient_evaluations_per_step(Method::marwp) == 2);

  Problem p;
  for (const auto m : {Method::sgd, Method::sam, Method::rwp, Method::arwp, Method::mrwp, Method::marwp}) {
    OptimizerConfig c;
    c.method = m;
    Optimizer opt(c, p.w.layout, Rng(1));
    auto w = p.w;
    for (std::size_t t = 1; t <= 3; ++t) w = opt.step(p.obj, w, {p.b1, p.b2}, t, 3, true).new_w;
    CHECK(opt.gradient_evaluations() == 3 * gradient_evaluations_per_step(m));
    CHECK(opt.adaptive_state().has_value() == is_adaptive(m));
  }
}

TEST_CASE("optimizer config json and validation") {
  const OptimizerConfig c = nlohmann::json::parse(
      R"({"method":"marwp","gamma0":0.05,"lr_schedule":"inverse_sqrt","lambda":0.3,"batch_pairing":"different",
          "perturb":{"sigma_max":0.02}})");
  CHECK(c.method == Method::marwp);
  CHECK(c.lambda == 0.3);
  CHECK(c.batch_pairing == BatchPairing::different);
  CHECK(c.perturb.sigma_max == 0.02);
  const nlohmann::json j = c;
  CHECK(j.get<OptimizerConfig>() == c);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"method":"adam"})").get<OptimizerConfig>(), ValidationError);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"method":"mrwp","lambda":1.5})").get<OptimizerConfig>(),
                  ValidationError);
  OptimizerConfig m;
  m.m_sharpness = 3;
  CHECK_THROWS_AS(m.validate(32), ValidationError);
  CHECK_NOTHROW(m.validate(30));
}

}  // TEST_SUITE
