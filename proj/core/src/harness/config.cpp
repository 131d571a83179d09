#include "perturbopt/harness/config.hpp"

#include <fstream>
#include <string>

#include <fmt/format.h>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/io.hpp"
#include "perturbopt/optim/io.hpp"

namespace perturbopt::harness {

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_limit(const nlohmann::json& j, std::optional<std::size_t>& out) {
  if (j.contains("limit") && !j.at("limit").is_null()) out = j.at("limit").get<std::size_t>();
}

}  // namespace

void to_json(nlohmann::json& j, const DatasetSpec& s) {
  std::visit(
      [&](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, TwoMoons>) {
          j = {{"type", "two_moons"}, {"n", src.n}, {"noise_std", src.noise_std},
               {"label_noise_frac", src.label_noise_frac}, {"seed", src.seed}};
        } else if constexpr (std::is_same_v<T, Blobs>) {
          j = {{"type", "blobs"}, {"n", src.n}, {"classes", src.classes}, {"spread", src.spread},
               {"seed", src.seed}, {"dim", src.dim}, {"label_noise_frac", src.label_noise_frac}};
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          j = {{"type", "quadratic"}, {"d", src.d}, {"condition_number", src.condition_number},
               {"seed", src.seed}, {"beta", src.beta}};
        } else if constexpr (std::is_same_v<T, IdxFiles>) {
          j = {{"type", "idx"}, {"images_path", src.images_path.string()}, {"labels_path", src.labels_path.string()}};
          if (src.limit) j["limit"] = *src.limit;
        } else {
          j = {{"type", "cifar_binary"}, {"path", src.path.string()}};
          if (src.limit) j["limit"] = *src.limit;
        }
      },
      s.source);
  j["train_fraction"] = s.train_fraction;
}

void from_json(const nlohmann::json& j, DatasetSpec& s) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "two_moons") {
      TwoMoons m;
      read_opt(j, "n", m.n);
      read_opt(j, "noise_std", m.noise_std);
      read_opt(j, "label_noise_frac", m.label_noise_frac);
      read_opt(j, "seed", m.seed);
      s.source = m;
    } else if (type == "blobs") {
      Blobs b;
      read_opt(j, "n", b.n);
      read_opt(j, "classes", b.classes);
      read_opt(j, "spread", b.spread);
      read_opt(j, "seed", b.seed);
      read_opt(j, "dim", b.dim);
      read_opt(j, "label_noise_frac", b.label_noise_frac);
      s.source = b;
    } else if (type == "quadratic") {
      Quadratic q;
      read_opt(j, "d", q.d);
      read_opt(j, "condition_number", q.condition_number);
      read_opt(j, "seed", q.seed);
      read_opt(j, "beta", q.beta);
      s.source = q;
    } else if (type == "idx") {
      IdxFiles f;
      f.images_path = j.at("images_path").get<std::string>();
      f.labels_path = j.at("labels_path").get<std::string>();
      read_limit(j, f.limit);
      s.source = f;
    } else if (type == "cifar_binary") {
      CifarBinary c;
      c.path = j.at("path").get<std::string>();
      read_limit(j, c.limit);
      s.source = c;
    } else {
      throw ValidationError(
          fmt::format("unknown dataset type '{}' (expected two_moons, blobs, quadratic, idx, cifar_binary)", type));
    }
    read_opt(j, "train_fraction", s.train_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid dataset config: ") + e.what());
  }
  s.validate();
}

void to_json(nlohmann::json& j, const AnalysisSettings& s) {
  j = {{"landscape", {{"n1", s.landscape.n1}, {"n2", s.landscape.n2}, {"range", s.landscape.range},
                      {"seed", s.landscape.seed}}},
       {"spectrum", {{"iters", s.spectrum.iters}, {"seed", s.spectrum.seed}, {"hvp_step", s.spectrum.hvp_step},
                     {"max_examples", s.spectrum.max_examples}}},
       {"radius", {{"n_radii", s.radius.n_radii}, {"r_min", s.radius.r_min}, {"r_max", s.radius.r_max},
                   {"n_samples", s.radius.n_samples}, {"seed", s.radius.seed}}}};
}

void from_json(const nlohmann::json& j, AnalysisSettings& s) {
  try {
    if (j.contains("landscape")) {
      const auto& l = j.at("landscape");
      read_opt(l, "n1", s.landscape.n1);
      read_opt(l, "n2", s.landscape.n2);
      read_opt(l, "range", s.landscape.range);
      read_opt(l, "seed", s.landscape.seed);
    }
    if (j.contains("spectrum")) {
      const auto& p = j.at("spectrum");
      read_opt(p, "iters", s.spectrum.iters);
      read_opt(p, "seed", s.spectrum.seed);
      read_opt(p, "hvp_step", s.spectrum.hvp_step);
      read_opt(p, "max_examples", s.spectrum.max_examples);
    }
    if (j.contains("radius")) {
      const auto& r = j.at("radius");
      read_opt(r, "n_radii", s.radius.n_radii);
      read_opt(r, "r_min", s.radius.r_min);
      read_opt(r, "r_max", s.radius.r_max);
      read_opt(r, "n_samples", s.radius.n_samples);
      read_opt(r, "seed", s.radius.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid analysis config: ") + e.what());
  }
  if (s.landscape.n1 < 1 || s.landscape.n2 < 1) throw ValidationError("landscape n1 and n2 must be >= 1");
  if (!(s.landscape.range > 0.0)) throw ValidationError("landscape range must be > 0");
  if (s.spectrum.iters < 1) throw ValidationError("spectrum iters must be >= 1");
  if (!(s.spectrum.hvp_step >= 0.0)) throw ValidationError("spectrum hvp_step must be >= 0");
  if (s.radius.n_radii < 2) throw ValidationError("radius n_radii must be >= 2");
  if (!(s.radius.r_min > 0.0 && s.radius.r_max > s.radius.r_min)) {
    throw ValidationError("radius grid needs 0 < r_min < r_max");
  }
  if (s.radius.n_samples < 1) throw ValidationError("radius n_samples must be >= 1");
}

void ExperimentConfig::validate() const {
  dataset.validate();
  if (!dataset.is_quadratic()) model.validate();
  optimizer.validate(dataset.is_quadratic() ? 0 : batch_size);
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (telemetry_stride < 1) throw ValidationError("telemetry_stride must be >= 1");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"dataset", c.dataset},
       {"optimizer", c.optimizer},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"seed", c.seed},
       {"telemetry_stride", c.telemetry_stride},
       {"outputs", c.outputs.string()},
       {"analysis", c.analysis}};
  if (!c.dataset.is_quadratic()) j["model"] = c.model;
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  try {
    c.dataset = j.at("dataset").get<DatasetSpec>();
    if (!c.dataset.is_quadratic() || j.contains("model")) c.model = j.at("model").get<nn::ModelSpec>();
    c.optimizer = j.at("optimizer").get<optim::OptimizerConfig>();
    read_opt(j, "epochs", c.epochs);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "seed", c.seed);
    read_opt(j, "telemetry_stride", c.telemetry_stride);
    if (j.contains("outputs")) c.outputs = j.at("outputs").get<std::string>();
    if (j.contains("analysis")) c.analysis = j.at("analysis").get<AnalysisSettings>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid experiment config: ") + e.what());
  }
  c.validate();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("'{}': malformed JSON: {}", path.string(), e.what()));
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return j.get<ExperimentConfig>();
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

}  // namespace perturbopt::harness
