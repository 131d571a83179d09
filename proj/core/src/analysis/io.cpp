#include "perturbopt/analysis/io.hpp"

#include <fmt/format.h>

#include <fstream>

#include "perturbopt/errors.hpp"

namespace perturbopt::analysis {

std::string format_double(double x) { return fmt::format("{}", x); }

std::string landscape_csv(const LandscapeGrid& g) {
  std::string out = "a,b,loss\n";
  for (std::size_t i = 0; i < g.n1; ++i) {
    for (std::size_t j = 0; j < g.n2; ++j) {
      out += fmt::format("{},{},{}\n", g.a[i], g.b[j], g.at(i, j));
    }
  }
  return out;
}

std::string spectrum_csv(const SpectrumResult& s) {
  std::string out = "ritz_value,weight\n";
  for (std::size_t i = 0; i < s.ritz_values.size(); ++i) {
    out += fmt::format("{},{}\n", s.ritz_values[i], s.ritz_weights[i]);
  }
  return out;
}

std::string sweep_csv(const SweepResult& s) {
  std::string out = "radius,awp_loss,rwp_loss,rwp_stderr,n_samples\n";
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    out += fmt::format("{},{},{},{},{}\n", s.radii[i], s.awp_loss[i], s.rwp_loss[i], s.rwp_stderr[i], s.n_samples);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw ValidationError("write to '" + path.string() + "' failed");
}

void to_json(nlohmann::json& j, const TheoryConstants& c) {
  j = nlohmann::json{{"alpha", c.alpha}, {"beta", c.beta}, {"M", c.M}, {"d", c.d}, {"L0_minus_Lstar", c.L0_minus_Lstar}};
}

void from_json(const nlohmann::json& j, TheoryConstants& c) {
  try {
    c.alpha = j.value("alpha", 1.0);
    c.beta = j.at("beta").get<double>();
    c.M = j.value("M", 0.0);
    c.d = j.at("d").get<std::size_t>();
    c.L0_minus_Lstar = j.at("L0_minus_Lstar").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid theory constants: ") + e.what());
  }
  c.validate();
}

nlohmann::json bound_report(const TheoryConstants& c, double gamma0, std::size_t T, double sigma, double lambda) {
  nlohmann::json j;
  j["constants"] = c;
  j["gamma0"] = gamma0;
  j["T"] = T;
  j["sigma"] = sigma;
  j["lambda"] = lambda;
  j["rwp_bound"] = rwp_bound(c, gamma0, T, sigma);
  j["mrwp_bound"] = mrwp_bound(c, gamma0, T, sigma, lambda);
  j["rwp_floor"] = bound_floor(c, sigma, 1.0);
  j["mrwp_floor"] = bound_floor(c, sigma, lambda);
  j["variance_factor"] = variance_factor(lambda);
  if (sigma > 0.0) {
    const auto s = smoothness_report(c, sigma, lambda);
    nlohmann::json sm{{"rwp_smoothness", s.rwp_smoothness},
                      {"mrwp_smoothness", s.mrwp_smoothness},
                      {"mrwp_smoothness_scaled", s.mrwp_smoothness_scaled},
                      {"window_applicable", s.window_applicable},
                      {"lambda_in_window", s.lambda_in_window}};
    if (s.lambda_window) sm["lambda_window"] = {s.lambda_window->first, s.lambda_window->second};
    if (s.scaled_below_rwp) sm["scaled_below_rwp"] = *s.scaled_below_rwp;
    j["smoothness"] = sm;
  }
  return j;
}

}  // namespace perturbopt::analysis
