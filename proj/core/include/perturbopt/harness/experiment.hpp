#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "perturbopt/harness/config.hpp"
#include "perturbopt/harness/dataset.hpp"
#include "perturbopt/nn/layout.hpp"
#include "perturbopt/nn/objective.hpp"
#include "perturbopt/perturb/perturb.hpp"

namespace perturbopt::harness {

struct IterationRow {
  std::size_t t = 0;
  double sigma = 0.0;
  double lr = 0.0;
  double train_loss = 0.0;  ///< clean mini-batch loss at w_t
  std::optional<double> perturbed_loss;
  std::optional<double> grad_norm;
  std::optional<double> epsilon_radius;

  bool operator==(const IterationRow&) const = default;
};

/// Accuracy columns are empty for objectives without labels.
struct EpochRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> train_acc;
  double test_loss = 0.0;
  std::optional<double> test_acc;
  std::optional<double> gen_gap;

  bool operator==(const EpochRow&) const = default;
};

struct RunRecord {
  std::vector<IterationRow> iterations;
  std::vector<EpochRow> epochs;
  std::size_t steps = 0;
  std::size_t steps_per_epoch = 0;
  std::uint64_t gradient_evaluations = 0;
  double wall_seconds = 0.0;
  bool diverged = false;
  /// Last step whose loss and iterate were finite (0 = the initial point).
  std::size_t last_finite_step = 0;
  nn::ParamVector final_w;
  std::optional<perturb::AdaptiveState> adaptive;

  /// Everything except wall-clock time.
  bool same_outcome(const RunRecord& other) const;
  double final_train_loss() const;
  std::optional<double> final_test_acc() const;
  std::optional<double> final_gen_gap() const;
};

struct RunOptions {
  /// Threads for the mixed-step gradient pair. Results do not depend on it.
  unsigned workers = 1;
  bool write_outputs = true;
  /// Overrides ExperimentConfig::outputs.
  std::optional<std::filesystem::path> out_dir;
};

/// Objective for the configured source: the model, or the quadratic form.
std::unique_ptr<nn::Objective> make_objective(const ExperimentConfig& cfg, const Dataset& data);

/// Starting point: the quadratic's w0, or seeded model initialisation.
nn::ParamVector initial_params(const ExperimentConfig& cfg, const Dataset& data);

/// Trains for cfg.epochs epochs. Each epoch is floor(n_train / examples per
/// step) steps (one full-batch step for the quadratic source). Iteration rows
/// are kept at t = 1 and every telemetry_stride steps; epoch rows after every
/// epoch. Writes run.csv, epochs.csv, final.pvec, adaptive.asta (adaptive
/// methods) and summary.json when requested. On a non-finite loss or iterate
/// the outputs gathered so far are written and DivergenceError is thrown.
RunRecord run_experiment(const ExperimentConfig& cfg, const Dataset& data, const RunOptions& opts = {});
RunRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::string iterations_csv(const RunRecord& r);
std::string epochs_csv(const RunRecord& r);
nlohmann::json summary_json(const ExperimentConfig& cfg, const RunRecord& r);

}  // namespace perturbopt::harness
