#include "perturbopt/harness/sweep.hpp"

#include <fmt/format.h>

#include "perturbopt/analysis/io.hpp"
#include "perturbopt/analysis/parallel.hpp"
#include "perturbopt/errors.hpp"
#include "perturbopt/harness/experiment.hpp"

namespace perturbopt::harness {

namespace {

bool uses_sigma(optim::Method m) { return m != optim::Method::sgd && m != optim::Method::sam; }

std::string cell(const std::optional<double>& v) { return v ? analysis::format_double(*v) : std::string(); }

}  // namespace

void from_json(const nlohmann::json& j, SweepSpec& s) {
  try {
    s.base = j.at("base").get<ExperimentConfig>();
    s.methods.clear();
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) s.methods.push_back(optim::method_from_string(m.get<std::string>()));
    }
    s.sigmas = j.value("sigmas", std::vector<double>{});
    s.lambdas = j.value("lambdas", std::vector<double>{});
    s.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid sweep config: ") + e.what());
  }
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return j.get<SweepSpec>();
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::vector<SweepVariant> expand_sweep(const SweepSpec& spec, std::vector<std::string>* skipped) {
  const auto methods = spec.methods.empty() ? std::vector{spec.base.optimizer.method} : spec.methods;
  const auto sigmas = spec.sigmas.empty() ? std::vector{spec.base.optimizer.perturb.sigma_max} : spec.sigmas;
  const auto lambdas = spec.lambdas.empty() ? std::vector{spec.base.optimizer.lambda} : spec.lambdas;
  const auto seeds = spec.seeds.empty() ? std::vector{spec.base.seed} : spec.seeds;

  std::vector<SweepVariant> out;
  std::vector<std::string> bad;
  for (const auto method : methods) {
    const std::size_t ns = uses_sigma(method) ? sigmas.size() : 1;
    const std::size_t nl = optim::is_mixed(method) ? lambdas.size() : 1;
    for (std::size_t si = 0; si < ns; ++si) {
      for (std::size_t li = 0; li < nl; ++li) {
        for (const auto seed : seeds) {
          SweepVariant v;
          v.config = spec.base;
          v.method = method;
          v.seed = seed;
          v.config.optimizer.method = method;
          v.config.seed = seed;
          if (uses_sigma(method)) {
            v.sigma = sigmas[si];
            v.config.optimizer.perturb.sigma_max = sigmas[si];
          }
          if (optim::is_mixed(method)) {
            v.lambda = lambdas[li];
            v.config.optimizer.lambda = lambdas[li];
          }
          v.name = fmt::format("{:03}_{}", out.size() + bad.size(), optim::to_string(method));
          if (v.sigma) v.name += "_s" + analysis::format_double(*v.sigma);
          if (v.lambda) v.name += "_l" + analysis::format_double(*v.lambda);
          v.name += fmt::format("_seed{}", seed);
          try {
            v.config.validate();
            out.push_back(std::move(v));
          } catch (const ValidationError& e) {
            bad.push_back(fmt::format("{}: {}", v.name, e.what()));
          }
        }
      }
    }
  }
  if (out.empty()) {
    std::string msg = "sweep has no valid variants:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ValidationError(msg);
  }
  if (skipped) *skipped = std::move(bad);
  return out;
}

SweepOutcome run_sweep(const SweepSpec& spec, unsigned workers, const std::optional<std::filesystem::path>& out_dir) {
  SweepOutcome outcome;
  const auto variants = expand_sweep(spec, &outcome.skipped);
  const Dataset data = generate_dataset(spec.base.dataset);
  outcome.rows.resize(variants.size());
  analysis::parallel_for(variants.size(), workers, [&](std::size_t i) {
    const auto& v = variants[i];
    RunOptions opts;
    opts.write_outputs = out_dir.has_value();
    if (out_dir) opts.out_dir = *out_dir / "runs" / v.name;
    const auto rec = run_experiment(v.config, data, opts);
    SweepRow row;
    row.method = v.method;
    row.sigma = v.sigma;
    row.lambda = v.lambda;
    row.seed = v.seed;
    row.final_train_loss = rec.final_train_loss();
    row.final_test_acc = rec.final_test_acc();
    row.gen_gap = rec.final_gen_gap();
    outcome.rows[i] = row;
  });
  return outcome;
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows) {
  std::string out = "method,sigma,lambda,seed,final_train_loss,final_test_acc,gen_gap\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", optim::to_string(r.method), cell(r.sigma), cell(r.lambda), r.seed,
                       analysis::format_double(r.final_train_loss), cell(r.final_test_acc), cell(r.gen_gap));
  }
  return out;
}

}  // namespace perturbopt::harness
