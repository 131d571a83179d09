#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "perturbopt/nn/io.hpp"
#include "perturbopt/perturb/perturb.hpp"

namespace perturbopt::perturb {

// {"rho":..,"sigma_max":..,"eta":..,"beta_decay":..,"schedule":"constant"|"cosine",
//  "distribution":"filter_wise"|"isotropic","elementwise_history":false}
// Missing keys keep their defaults.
void to_json(nlohmann::json& j, const PerturbConfig& c);
void from_json(const nlohmann::json& j, PerturbConfig& c);

inline constexpr nn::Magic kAdaptiveMagic{'A', 'S', 'T', 'A', '0', '0', '0', '1'};

/// Payload layout (all doubles): t, k, d_coord, per_group_sum[k], per_coord_sum[d_coord].
void save_adaptive_state(const std::filesystem::path& path, const AdaptiveState& s);
AdaptiveState load_adaptive_state(const std::filesystem::path& path);

}  // namespace perturbopt::perturb
