#include "perturbopt_cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "perturbopt/analysis/bounds.hpp"
#include "perturbopt/analysis/io.hpp"
#include "perturbopt/analysis/lanczos.hpp"
#include "perturbopt/analysis/landscape.hpp"
#include "perturbopt/analysis/perturbed_loss.hpp"
#include "perturbopt/errors.hpp"
#include "perturbopt/harness/config.hpp"
#include "perturbopt/harness/experiment.hpp"
#include "perturbopt/harness/sweep.hpp"
#include "perturbopt/harness/threads.hpp"
#include "perturbopt/nn/io.hpp"

namespace perturbopt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) { analysis::write_text(path, j.dump(2) + "\n"); }

/// Config, data, objective and checkpoint shared by the analysis commands.
struct Loaded {
  harness::ExperimentConfig cfg;
  harness::Dataset data;
  std::unique_ptr<nn::Objective> obj;
  nn::ParamVector w;
};

Loaded load_checkpoint(const fs::path& ckpt, const fs::path& config) {
  Loaded l;
  l.cfg = harness::load_experiment_config(config);
  l.data = harness::generate_dataset(l.cfg.dataset);
  l.obj = harness::make_objective(l.cfg, l.data);
  l.w = nn::load_params(ckpt, l.obj->layout());
  return l;
}

int cmd_train(const fs::path& config, const fs::path& out_dir, std::ostream& out) {
  const auto cfg = harness::load_experiment_config(config);
  harness::RunOptions opts;
  opts.workers = harness::worker_count();
  opts.out_dir = out_dir;
  const auto rec = harness::run_experiment(cfg, opts);
  fmt::print(out, "method={} steps={} gradient_evaluations={} final_train_loss={}", optim::to_string(cfg.optimizer.method),
             rec.steps, rec.gradient_evaluations, analysis::format_double(rec.final_train_loss()));
  if (rec.final_test_acc()) fmt::print(out, " final_test_acc={}", analysis::format_double(*rec.final_test_acc()));
  fmt::print(out, " wall_seconds={:.3f}\nwrote {}\n", rec.wall_seconds, out_dir.string());
  return kExitOk;
}

int cmd_sweep(const fs::path& config, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  const auto spec = harness::load_sweep_spec(config);
  const auto outcome = harness::run_sweep(spec, harness::worker_count(), out_dir);
  for (const auto& s : outcome.skipped) fmt::print(err, "skipped {}\n", s);
  fs::create_directories(out_dir);
  analysis::write_text(out_dir / "sweep.csv", harness::sweep_rows_csv(outcome.rows));
  fmt::print(out, "{} runs, {} skipped\nwrote {}\n", outcome.rows.size(), outcome.skipped.size(),
             (out_dir / "sweep.csv").string());
  return kExitOk;
}

int cmd_landscape(const fs::path& ckpt, const fs::path& config, const fs::path& out_dir, std::ostream& out) {
  const auto l = load_checkpoint(ckpt, config);
  const auto& s = l.cfg.analysis.landscape;
  const auto grid = analysis::landscape_grid(*l.obj, l.w, l.data.train, s.n1, s.n2, {-s.range, s.range}, s.seed,
                                             harness::worker_count());
  double lo = grid.values.front();
  double hi = grid.values.front();
  for (const double v : grid.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  fs::create_directories(out_dir);
  analysis::write_text(out_dir / "landscape.csv", analysis::landscape_csv(grid));
  write_json(out_dir / "landscape.json", json{{"n1", grid.n1},
                                              {"n2", grid.n2},
                                              {"range", {grid.range.first, grid.range.second}},
                                              {"seed", s.seed},
                                              {"center_loss", grid.center_loss},
                                              {"train_loss", l.obj->loss(l.w.values, l.data.train)},
                                              {"min_loss", lo},
                                              {"max_loss", hi}});
  fmt::print(out, "center_loss={} min={} max={}\nwrote {}\n", analysis::format_double(grid.center_loss),
             analysis::format_double(lo), analysis::format_double(hi), (out_dir / "landscape.csv").string());
  return kExitOk;
}

int cmd_spectrum(const fs::path& ckpt, const fs::path& config, const fs::path& out_dir, std::ostream& out) {
  const auto l = load_checkpoint(ckpt, config);
  const auto& s = l.cfg.analysis.spectrum;
  const std::size_t n = l.data.train.size();
  const nn::Batch batch =
      s.max_examples == 0 || s.max_examples >= n ? l.data.train : l.data.train.slice(0, s.max_examples);
  const double h = s.hvp_step > 0.0 ? s.hvp_step : nn::default_hvp_step(l.w.values);
  const nn::GradientFn grad = [&](std::span<const double> w, std::span<double> g) {
    l.obj->loss_and_grad(w, batch, g);
  };
  const analysis::OperatorFn op = [&](std::span<const double> v, std::span<double> hv) {
    const auto r = nn::hvp(grad, l.w.values, v, h);
    std::copy(r.begin(), r.end(), hv.begin());
  };
  const std::size_t iters = std::min(s.iters, l.w.values.size());
  const auto spec = analysis::lanczos_spectrum(op, l.w.values.size(), iters, s.seed);
  fs::create_directories(out_dir);
  analysis::write_text(out_dir / "spectrum.csv", analysis::spectrum_csv(spec));
  write_json(out_dir / "spectrum.json", json{{"dominant", spec.dominant()},
                                             {"iterations", spec.iterations},
                                             {"hvp_step", h},
                                             {"examples", batch.size()},
                                             {"ritz_values", spec.ritz_values},
                                             {"ritz_weights", spec.ritz_weights}});
  fmt::print(out, "dominant={} iterations={}\nwrote {}\n", analysis::format_double(spec.dominant()), spec.iterations,
             (out_dir / "spectrum.csv").string());
  return kExitOk;
}

int cmd_radius(const fs::path& ckpt, const fs::path& config, const fs::path& out_dir, std::ostream& out) {
  const auto l = load_checkpoint(ckpt, config);
  const auto& s = l.cfg.analysis.radius;
  const unsigned workers = harness::worker_count();
  const auto radii = analysis::log_grid(std::log10(s.r_min), std::log10(s.r_max), s.n_radii);
  const auto sweep = analysis::radius_sweep(*l.obj, l.w, l.data.train, radii, s.n_samples, s.seed, workers);
  bool dominates_mean = true;
  bool dominates_median = true;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    dominates_mean = dominates_mean && sweep.awp_loss[i] >= sweep.rwp_loss[i];
    dominates_median = dominates_median && sweep.awp_loss[i] >= sweep.rwp_median[i];
  }
  const double r_ref = radii.back();
  const double hi = r_ref * 1e4;
  const double matched = analysis::rwp_radius_for_loss(*l.obj, l.w, l.data.train, sweep.awp_loss.back(), s.n_samples,
                                                       s.seed, r_ref, hi, workers);
  fs::create_directories(out_dir);
  analysis::write_text(out_dir / "radius.csv", analysis::sweep_csv(sweep));
  write_json(out_dir / "radius.json", json{{"radii", sweep.radii},
                                           {"awp_loss", sweep.awp_loss},
                                           {"rwp_loss", sweep.rwp_loss},
                                           {"rwp_median", sweep.rwp_median},
                                           {"rwp_sigma", sweep.rwp_sigma},
                                           {"n_samples", sweep.n_samples},
                                           {"awp_ge_rwp_mean", dominates_mean},
                                           {"awp_ge_rwp_median", dominates_median},
                                           {"reference_radius", r_ref},
                                           {"matching_rwp_radius", matched},
                                           {"match_reached", matched < hi},
                                           {"radius_ratio", matched / r_ref}});
  fmt::print(out, "awp>=rwp at every radius: {}; rwp radius matching awp at r={}: {} (ratio {})\nwrote {}\n",
             dominates_mean ? "yes" : "no", analysis::format_double(r_ref), analysis::format_double(matched),
             analysis::format_double(matched / r_ref), (out_dir / "radius.csv").string());
  return kExitOk;
}

int cmd_bounds(const fs::path& constants, const fs::path& out_dir, std::ostream& out) {
  const auto j = harness::read_json_file(constants);
  analysis::TheoryConstants c;
  double gamma0 = 0.0;
  std::size_t T = 0;
  double sigma = 0.0;
  double lambda = 0.5;
  try {
    c = j.get<analysis::TheoryConstants>();
    gamma0 = j.at("gamma0").get<double>();
    T = j.at("T").get<std::size_t>();
    sigma = j.at("sigma").get<double>();
    lambda = j.value("lambda", lambda);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("'{}': {}", constants.string(), e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("'{}': {}", constants.string(), e.what()));
  }
  const auto report = analysis::bound_report(c, gamma0, T, sigma, lambda);
  fs::create_directories(out_dir);
  write_json(out_dir / "bounds.json", report);
  fmt::print(out, "rwp_bound {:.6f}\nmrwp_bound {:.6f} (lambda {})\nfloor {:.6f}\nwrote {}\n",
             report["rwp_bound"].get<double>(), report["mrwp_bound"].get<double>(), analysis::format_double(lambda),
             report["rwp_floor"].get<double>(), (out_dir / "bounds.json").string());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random and adversarial weight perturbation training and analysis", "perturbopt"};
  app.require_subcommand(1);
  std::string out_dir = "out";
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string config;
  std::string ckpt;
  auto* train = app.add_subcommand("train", "Train one experiment");
  train->add_option("config", config, "Experiment config (JSON)")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments");
  sweep->add_option("config", config, "Sweep config (JSON)")->required();
  auto* landscape = app.add_subcommand("landscape", "2-D loss surface around a checkpoint");
  auto* spectrum = app.add_subcommand("spectrum", "Hessian spectrum via Lanczos");
  auto* radius = app.add_subcommand("radius", "AWP vs RWP perturbed loss over radii");
  for (auto* sub : {landscape, spectrum, radius}) {
    sub->add_option("checkpoint", ckpt, "Parameter file (.pvec)")->required();
    sub->add_option("config", config, "Experiment config (JSON)")->required();
  }
  auto* bounds = app.add_subcommand("bounds", "Evaluate convergence bounds");
  bounds->add_option("constants", config, "Constants (JSON)")->required();
  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--out", out_dir, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--out") {
        ++i;
        continue;
      }
      if (arg.rfind("-", 0) == 0) continue;
      if (app.get_subcommand_no_throw(arg) == nullptr) what = "unknown subcommand '" + arg + "'";
      break;
    }
    err << "error: " << what << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    const fs::path dir(out_dir);
    if (train->parsed()) return cmd_train(config, dir, out);
    if (sweep->parsed()) return cmd_sweep(config, dir, out, err);
    if (landscape->parsed()) return cmd_landscape(ckpt, config, dir, out);
    if (spectrum->parsed()) return cmd_spectrum(ckpt, config, dir, out);
    if (radius->parsed()) return cmd_radius(ckpt, config, dir, out);
    if (bounds->parsed()) return cmd_bounds(config, dir, out);
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace perturbopt::cli
