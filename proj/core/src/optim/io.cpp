#include "perturbopt/optim/io.hpp"

#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/perturb/io.hpp"

namespace perturbopt::optim {

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
  j = nlohmann::json{{"method", to_string(c.method)},
                     {"gamma0", c.gamma0},
                     {"lr_schedule", to_string(c.lr_schedule)},
                     {"lambda", c.lambda},
                     {"batch_pairing", to_string(c.batch_pairing)},
                     {"m_sharpness", c.m_sharpness},
                     {"momentum", c.momentum},
                     {"weight_decay", c.weight_decay},
                     {"perturb", c.perturb}};
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
  try {
    OptimizerConfig d;
    c.method = method_from_string(j.at("method").get<std::string>());
    c.gamma0 = j.value("gamma0", d.gamma0);
    c.lr_schedule = lr_schedule_from_string(j.value("lr_schedule", std::string(to_string(d.lr_schedule))));
    c.lambda = j.value("lambda", d.lambda);
    c.batch_pairing = batch_pairing_from_string(j.value("batch_pairing", std::string(to_string(d.batch_pairing))));
    c.m_sharpness = j.value("m_sharpness", d.m_sharpness);
    c.momentum = j.value("momentum", d.momentum);
    c.weight_decay = j.value("weight_decay", d.weight_decay);
    c.perturb = j.contains("perturb") ? j.at("perturb").get<perturb::PerturbConfig>() : d.perturb;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid optimizer config: ") + e.what());
  }
  c.validate();
}

}  // namespace perturbopt::optim
