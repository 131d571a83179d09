#include "perturbopt/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <fmt/format.h>

#include "perturbopt/analysis/io.hpp"
#include "perturbopt/errors.hpp"
#include "perturbopt/nn/io.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/optim/batching.hpp"
#include "perturbopt/optim/optimizer.hpp"
#include "perturbopt/perturb/io.hpp"

namespace perturbopt::harness {

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? analysis::format_double(*v) : std::string(); }

EpochRow evaluate(const nn::Objective& obj, const nn::ParamVector& w, const Dataset& data, std::size_t epoch) {
  EpochRow row;
  row.epoch = epoch;
  row.train_loss = obj.loss(w.values, data.train);
  row.test_loss = obj.loss(w.values, data.test);
  if (obj.is_classifier()) {
    row.train_acc = obj.accuracy(w.values, data.train);
    row.test_acc = obj.accuracy(w.values, data.test);
    row.gen_gap = *row.train_acc - *row.test_acc;
  }
  return row;
}

void persist(const ExperimentConfig& cfg, const RunRecord& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  analysis::write_text(dir / "run.csv", iterations_csv(r));
  analysis::write_text(dir / "epochs.csv", epochs_csv(r));
  nn::save_params(dir / "final.pvec", r.final_w);
  if (r.adaptive) perturb::save_adaptive_state(dir / "adaptive.asta", *r.adaptive);
  analysis::write_text(dir / "summary.json", summary_json(cfg, r).dump(2) + "\n");
}

}  // namespace

bool RunRecord::same_outcome(const RunRecord& o) const {
  return iterations == o.iterations && epochs == o.epochs && steps == o.steps &&
         steps_per_epoch == o.steps_per_epoch && gradient_evaluations == o.gradient_evaluations &&
         diverged == o.diverged && last_finite_step == o.last_finite_step && final_w == o.final_w &&
         adaptive == o.adaptive;
}

double RunRecord::final_train_loss() const { return epochs.empty() ? NAN : epochs.back().train_loss; }

std::optional<double> RunRecord::final_test_acc() const {
  return epochs.empty() ? std::nullopt : epochs.back().test_acc;
}

std::optional<double> RunRecord::final_gen_gap() const {
  return epochs.empty() ? std::nullopt : epochs.back().gen_gap;
}

std::unique_ptr<nn::Objective> make_objective(const ExperimentConfig& cfg, const Dataset& data) {
  if (data.quadratic) return std::make_unique<nn::QuadraticObjective>(data.quadratic->matrix, data.quadratic->d);
  return std::make_unique<nn::ModelObjective>(cfg.model);
}

nn::ParamVector initial_params(const ExperimentConfig& cfg, const Dataset& data) {
  if (data.quadratic) return {data.quadratic->w0, nn::FilterLayout::single(data.quadratic->d)};
  return nn::init_params(cfg.model, cfg.seed);
}

RunRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  return run_experiment(cfg, generate_dataset(cfg.dataset), opts);
}

RunRecord run_experiment(const ExperimentConfig& cfg, const Dataset& data, const RunOptions& opts) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto obj = make_objective(cfg, data);
  const bool quadratic = data.quadratic.has_value();
  const auto method = cfg.optimizer.method;
  const auto pairing = optim::uses_batch_pairing(method) ? cfg.optimizer.batch_pairing : optim::BatchPairing::same;

  std::size_t steps_per_epoch = 1;
  if (!quadratic) {
    if (cfg.model.input_size() != data.train.inputs.row_size()) {
      throw ValidationError(fmt::format("model expects {} inputs per example, dataset provides {}",
                                        cfg.model.input_size(), data.train.inputs.row_size()));
    }
    const std::size_t need = optim::examples_per_step(cfg.batch_size, pairing);
    if (need > data.train.size()) {
      throw ValidationError(fmt::format("batch_size {} needs {} training examples per step ('{}' pairing), only {}",
                                        cfg.batch_size, need, optim::to_string(pairing), data.train.size()));
    }
    steps_per_epoch = data.train.size() / need;
  }
  const std::size_t total = cfg.epochs * steps_per_epoch;

  nn::ParamVector w = initial_params(cfg, data);
  optim::Optimizer opt(cfg.optimizer, w.layout, Rng::substream(cfg.seed, 1), opts.workers);
  std::optional<optim::EpochStream> stream;
  if (!quadratic) stream.emplace(data.train.size(), Rng::substream(cfg.seed, 0));
  const optim::BatchPair unit_pair{data.train, data.train};

  RunRecord rec;
  rec.steps_per_epoch = steps_per_epoch;
  const auto dir = opts.out_dir.value_or(cfg.outputs);

  auto finish = [&] {
    rec.final_w = w;
    rec.adaptive = opt.adaptive_state();
    rec.gradient_evaluations = opt.gradient_evaluations();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto diverge = [&](std::size_t t, double loss) {
    rec.diverged = true;
    rec.last_finite_step = t;
    finish();
    if (opts.write_outputs) persist(cfg, rec, dir);
    throw DivergenceError(fmt::format("non-finite training state (loss {}) after step {}; last finite step {}",
                                      analysis::format_double(loss), t + 1, t),
                          t);
  };

  std::size_t t = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (stream) stream->start_epoch();
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      ++t;
      const bool telemetry = t == 1 || t % cfg.telemetry_stride == 0;
      optim::BatchPair pair =
          quadratic ? unit_pair : optim::next_batch_pair(data.train, *stream, cfg.batch_size, pairing);
      auto res = opt.step(*obj, w, pair, t, total, telemetry);
      if (!std::isfinite(res.loss_main) || !nn::all_finite(res.new_w.values)) diverge(t - 1, res.loss_main);
      if (telemetry) {
        IterationRow row;
        row.t = t;
        row.sigma = res.sigma_used;
        row.lr = optim::lr_at(t, total, cfg.optimizer);
        row.train_loss = res.loss_main;
        row.perturbed_loss = res.loss_perturbed;
        row.grad_norm = res.grad_norm;
        row.epsilon_radius = res.epsilon_radius;
        rec.iterations.push_back(row);
      }
      w = std::move(res.new_w);
      rec.last_finite_step = t;
    }
    auto row = evaluate(*obj, w, data, epoch);
    if (!std::isfinite(row.train_loss)) diverge(t, row.train_loss);
    rec.epochs.push_back(row);
  }
  rec.steps = t;
  finish();
  if (opts.write_outputs) persist(cfg, rec, dir);
  return rec;
}

std::string iterations_csv(const RunRecord& r) {
  std::string out = "t,sigma,lr,train_loss,perturbed_loss,grad_norm,epsilon_radius\n";
  for (const auto& row : r.iterations) {
    out += fmt::format("{},{},{},{},{},{},{}\n", row.t, analysis::format_double(row.sigma),
                       analysis::format_double(row.lr), analysis::format_double(row.train_loss),
                       opt_cell(row.perturbed_loss), opt_cell(row.grad_norm), opt_cell(row.epsilon_radius));
  }
  return out;
}

std::string epochs_csv(const RunRecord& r) {
  std::string out = "epoch,train_loss,train_acc,test_loss,test_acc,gen_gap\n";
  for (const auto& row : r.epochs) {
    out += fmt::format("{},{},{},{},{},{}\n", row.epoch, analysis::format_double(row.train_loss),
                       opt_cell(row.train_acc), analysis::format_double(row.test_loss), opt_cell(row.test_acc),
                       opt_cell(row.gen_gap));
  }
  return out;
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const RunRecord& r) {
  nlohmann::json j;
  j["config"] = cfg;
  j["steps"] = r.steps;
  j["steps_per_epoch"] = r.steps_per_epoch;
  j["gradient_evaluations"] = r.gradient_evaluations;
  j["wall_seconds"] = r.wall_seconds;
  j["diverged"] = r.diverged;
  j["last_finite_step"] = r.last_finite_step;
  j["final_train_loss"] = r.epochs.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.final_train_loss());
  j["final_test_acc"] = r.final_test_acc() ? nlohmann::json(*r.final_test_acc()) : nlohmann::json(nullptr);
  j["final_gen_gap"] = r.final_gen_gap() ? nlohmann::json(*r.final_gen_gap()) : nlohmann::json(nullptr);
  return j;
}

}  // namespace perturbopt::harness
