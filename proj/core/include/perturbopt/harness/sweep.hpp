#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perturbopt/harness/config.hpp"
#include "perturbopt/optim/config.hpp"

namespace perturbopt::harness {

/// Grid over methods x sigmas x lambdas x seeds around a base experiment.
/// Empty lists fall back to the base value. sigma is dropped for sgd/sam and
/// lambda for the non-mixed methods, so those variants are not repeated.
struct SweepSpec {
  ExperimentConfig base;
  std::vector<optim::Method> methods;
  std::vector<double> sigmas;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
};

struct SweepVariant {
  ExperimentConfig config;
  optim::Method method = optim::Method::sgd;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::string name;  ///< output subdirectory
};

struct SweepRow {
  optim::Method method = optim::Method::sgd;
  std::optional<double> sigma;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  double final_train_loss = 0.0;
  std::optional<double> final_test_acc;
  std::optional<double> gen_gap;

  bool operator==(const SweepRow&) const = default;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;          ///< declaration order
  std::vector<std::string> skipped;    ///< invalid variants with reasons
};

void from_json(const nlohmann::json& j, SweepSpec& s);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

/// Expands the grid in declaration order (method, sigma, lambda, seed) and
/// drops variants that fail validation. Throws ValidationError listing every
/// offender when nothing valid remains.
std::vector<SweepVariant> expand_sweep(const SweepSpec& spec, std::vector<std::string>* skipped = nullptr);

/// Runs every variant (up to `workers` at a time, each in its own
/// subdirectory of `out_dir` when given). Divergence and other errors
/// propagate.
SweepOutcome run_sweep(const SweepSpec& spec, unsigned workers = 1,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Header "method,sigma,lambda,seed,final_train_loss,final_test_acc,gen_gap".
std::string sweep_rows_csv(const std::vector<SweepRow>& rows);

}  // namespace perturbopt::harness
