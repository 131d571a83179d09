#include "perturbopt/perturb/io.hpp"

#include <string>

#include "perturbopt/errors.hpp"

namespace perturbopt::perturb {

void to_json(nlohmann::json& j, const PerturbConfig& c) {
  j = nlohmann::json{{"rho", c.rho},
                     {"sigma_max", c.sigma_max},
                     {"eta", c.eta},
                     {"beta_decay", c.beta_decay},
                     {"schedule", to_string(c.schedule)},
                     {"distribution", to_string(c.distribution)},
                     {"elementwise_history", c.elementwise_history}};
}

void from_json(const nlohmann::json& j, PerturbConfig& c) {
  try {
    PerturbConfig d;
    c.rho = j.value("rho", d.rho);
    c.sigma_max = j.value("sigma_max", d.sigma_max);
    c.eta = j.value("eta", d.eta);
    c.beta_decay = j.value("beta_decay", d.beta_decay);
    c.schedule = schedule_from_string(j.value("schedule", std::string(to_string(d.schedule))));
    c.distribution = distribution_from_string(j.value("distribution", std::string(to_string(d.distribution))));
    c.elementwise_history = j.value("elementwise_history", d.elementwise_history);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid perturb config: ") + e.what());
  }
  c.validate();
}

void save_adaptive_state(const std::filesystem::path& path, const AdaptiveState& s) {
  std::vector<double> payload;
  payload.reserve(3 + s.per_group_sum.size() + s.per_coord_sum.size());
  payload.push_back(static_cast<double>(s.t));
  payload.push_back(static_cast<double>(s.per_group_sum.size()));
  payload.push_back(static_cast<double>(s.per_coord_sum.size()));
  payload.insert(payload.end(), s.per_group_sum.begin(), s.per_group_sum.end());
  payload.insert(payload.end(), s.per_coord_sum.begin(), s.per_coord_sum.end());
  nn::write_container(path, kAdaptiveMagic, payload);
}

AdaptiveState load_adaptive_state(const std::filesystem::path& path) {
  const auto p = nn::read_container(path, kAdaptiveMagic);
  if (p.size() < 3) throw ValidationError("'" + path.string() + "': adaptive state header truncated");
  const auto k = static_cast<std::size_t>(p[1]);
  const auto dc = static_cast<std::size_t>(p[2]);
  if (p.size() != 3 + k + dc || p[0] < 1.0) {
    throw ValidationError("'" + path.string() + "': adaptive state payload is inconsistent");
  }
  AdaptiveState s;
  s.t = static_cast<std::uint64_t>(p[0]);
  s.per_group_sum.assign(p.begin() + 3, p.begin() + 3 + static_cast<std::ptrdiff_t>(k));
  s.per_coord_sum.assign(p.begin() + 3 + static_cast<std::ptrdiff_t>(k), p.end());
  return s;
}

}  // namespace perturbopt::perturb
