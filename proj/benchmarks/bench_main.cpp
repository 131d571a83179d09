#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "perturbopt/analysis/lanczos.hpp"
#include "perturbopt/nn/network.hpp"
#include "perturbopt/nn/objective.hpp"
#include "perturbopt/optim/steps.hpp"
#include "perturbopt/perturb/perturb.hpp"

using namespace perturbopt;

namespace {

nn::ModelSpec mlp() { return nn::make_mlp({2, 32, 32, 2}, nn::Activation::tanh, nn::LossHead::softmax_cross_entropy); }

nn::Batch moons_like(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  nn::Batch b;
  b.inputs = nn::Tensor::zeros({n, 2});
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.inputs.data[2 * i] = rng.normal();
    b.inputs.data[2 * i + 1] = rng.normal();
    b.labels[i] = b.inputs.data[2 * i] > 0.0 ? 1 : 0;
  }
  return b;
}

void BM_loss_and_grad(benchmark::State& state) {
  const auto model = mlp();
  const auto batch = moons_like(static_cast<std::size_t>(state.range(0)), 1);
  const auto w = nn::init_params(model, 1);
  std::vector<double> g(w.size());
  for (auto _ : state) benchmark::DoNotOptimize(nn::loss_and_grad(model, w.span(), batch, g));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_loss_and_grad)->Arg(32)->Arg(256);

void BM_hvp(benchmark::State& state) {
  const auto model = mlp();
  const auto batch = moons_like(256, 2);
  const auto w = nn::init_params(model, 2);
  const auto v = nn::init_params(model, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::hvp(model, w, batch, v, 1e-4));
}
BENCHMARK(BM_hvp);

void BM_lanczos(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(d * d);
  Rng rng(4);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) a[i * d + j] = a[j * d + i] = rng.normal();
  }
  const analysis::OperatorFn op = [&](std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += a[i * d + j] * v[j];
      out[i] = s;
    }
  };
  for (auto _ : state) benchmark::DoNotOptimize(analysis::lanczos_spectrum(op, d, 20, 5));
}
BENCHMARK(BM_lanczos)->Arg(100)->Arg(1000);

void BM_sample_rwp(benchmark::State& state) {
  const auto w = nn::init_params(mlp(), 5);
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(perturb::sample_rwp(w, 0.01, rng));
}
BENCHMARK(BM_sample_rwp);

void BM_step(benchmark::State& state) {
  const nn::ModelObjective obj(mlp());
  optim::BatchPair pair{moons_like(32, 7), moons_like(32, 8)};
  auto w = nn::init_params(mlp(), 9);
  optim::RandomPerturbation rp;
  rp.sigma = 0.01;
  Rng rng(10);
  optim::Velocity v;
  const auto kind = state.range(0);
  for (auto _ : state) {
    switch (kind) {
      case 0: benchmark::DoNotOptimize(optim::step_sgd(obj, w, pair.b1, 0.01, {}, v)); break;
      case 1: benchmark::DoNotOptimize(optim::step_sam(obj, w, pair.b1, pair.b1, 0.01, 0.05, 0, {}, v)); break;
      case 2: benchmark::DoNotOptimize(optim::step_rwp(obj, w, pair.b1, 0.01, rp, rng, nullptr, {}, v)); break;
      default: benchmark::DoNotOptimize(optim::step_mrwp(obj, w, pair, 0.01, 0.5, rp, rng, nullptr, {}, v)); break;
    }
  }
}
BENCHMARK(BM_step)->ArgName("sgd0_sam1_rwp2_mrwp3")->DenseRange(0, 3);

}  // namespace

BENCHMARK_MAIN();
