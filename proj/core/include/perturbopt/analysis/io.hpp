#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "perturbopt/analysis/bounds.hpp"
#include "perturbopt/analysis/landscape.hpp"
#include "perturbopt/analysis/lanczos.hpp"
#include "perturbopt/analysis/perturbed_loss.hpp"

namespace perturbopt::analysis {

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// Header "a,b,loss"; one row per grid point, axis 1 outermost.
std::string landscape_csv(const LandscapeGrid& g);
/// Header "ritz_value,weight".
std::string spectrum_csv(const SpectrumResult& s);
/// Header "radius,awp_loss,rwp_loss,rwp_stderr,n_samples".
std::string sweep_csv(const SweepResult& s);

void write_text(const std::filesystem::path& path, const std::string& text);

void to_json(nlohmann::json& j, const TheoryConstants& c);
void from_json(const nlohmann::json& j, TheoryConstants& c);

/// Bounds, floors and smoothness constants for the given settings.
nlohmann::json bound_report(const TheoryConstants& c, double gamma0, std::size_t T, double sigma, double lambda);

}  // namespace perturbopt::analysis
