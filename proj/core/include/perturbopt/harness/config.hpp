#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "perturbopt/harness/dataset.hpp"
#include "perturbopt/nn/model.hpp"
#include "perturbopt/optim/config.hpp"

namespace perturbopt::harness {

/// Settings for the post-training analysis subcommands.
struct LandscapeSettings {
  std::size_t n1 = 25;
  std::size_t n2 = 25;
  double range = 1.0;
  std::uint64_t seed = 0;
};

struct SpectrumSettings {
  std::size_t iters = 20;
  std::uint64_t seed = 0;
  /// 0 selects the default finite-difference step.
  double hvp_step = 0.0;
  /// Training examples used for the Hessian (0 = all).
  std::size_t max_examples = 0;
};

struct RadiusSettings {
  std::size_t n_radii = 10;
  double r_min = 1e-3;
  double r_max = 1.0;
  std::size_t n_samples = 200;
  std::uint64_t seed = 0;
};

struct AnalysisSettings {
  LandscapeSettings landscape;
  SpectrumSettings spectrum;
  RadiusSettings radius;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  /// Unused (and optional in JSON) for the quadratic source.
  nn::ModelSpec model;
  optim::OptimizerConfig optimizer;
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t telemetry_stride = 1;
  std::filesystem::path outputs = "out";
  AnalysisSettings analysis;

  /// Checks everything that does not need the loaded data.
  void validate() const;
};

void to_json(nlohmann::json& j, const DatasetSpec& s);
void from_json(const nlohmann::json& j, DatasetSpec& s);
void to_json(nlohmann::json& j, const AnalysisSettings& s);
void from_json(const nlohmann::json& j, AnalysisSettings& s);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Reads and validates a JSON config. Missing or unparsable files and schema
/// errors raise ValidationError naming the path.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace perturbopt::harness
