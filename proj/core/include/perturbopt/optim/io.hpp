#pragma once

#include <nlohmann/json.hpp>

#include "perturbopt/optim/config.hpp"

namespace perturbopt::optim {

// Keys match the field names: method, gamma0, lr_schedule, lambda,
// batch_pairing, m_sharpness, momentum, weight_decay, perturb.
void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

}  // namespace perturbopt::optim
