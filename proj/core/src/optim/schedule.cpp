#include <cmath>
#include <numbers>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/optim/config.hpp"

namespace perturbopt::optim {

void OptimizerConfig::validate(std::size_t batch_size) const {
  if (!(std::isfinite(gamma0) && gamma0 > 0.0)) throw ValidationError("gamma0 must be finite and > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must lie in [0, 1)");
  if (!(std::isfinite(weight_decay) && weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (batch_size != 0 && m_sharpness != 0 && batch_size % m_sharpness != 0) {
    throw ValidationError("m_sharpness " + std::to_string(m_sharpness) + " does not divide batch size " +
                          std::to_string(batch_size));
  }
  perturb.validate();
}

bool is_mixed(Method m) noexcept { return m == Method::mrwp || m == Method::marwp; }

bool is_adaptive(Method m) noexcept { return m == Method::arwp || m == Method::marwp; }

bool uses_batch_pairing(Method m) noexcept { return is_mixed(m) || m == Method::sam; }

std::size_t gradient_evaluations_per_step(Method m) noexcept {
  switch (m) {
    case Method::sgd:
    case Method::rwp:
    case Method::arwp: return 1;
    case Method::sam:
    case Method::mrwp:
    case Method::marwp: return 2;
  }
  return 1;
}

double lr_at(std::size_t t, std::size_t total, const OptimizerConfig& cfg) {
  if (total < 1 || t < 1 || t > total) throw ValidationError("lr_at requires 1 <= t <= T");
  switch (cfg.lr_schedule) {
    case LrSchedule::constant: return cfg.gamma0;
    case LrSchedule::cosine_decay: {
      const double x = std::numbers::pi * static_cast<double>(t - 1) / static_cast<double>(total);
      return cfg.gamma0 * (1.0 + std::cos(x)) / 2.0;
    }
    case LrSchedule::inverse_sqrt: return cfg.gamma0 / std::sqrt(static_cast<double>(t));
  }
  return cfg.gamma0;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::sgd: return "sgd";
    case Method::sam: return "sam";
    case Method::rwp: return "rwp";
    case Method::arwp: return "arwp";
    case Method::mrwp: return "mrwp";
    case Method::marwp: return "marwp";
  }
  return "sgd";
}

std::string_view to_string(LrSchedule s) {
  switch (s) {
    case LrSchedule::constant: return "constant";
    case LrSchedule::cosine_decay: return "cosine_decay";
    case LrSchedule::inverse_sqrt: return "inverse_sqrt";
  }
  return "constant";
}

std::string_view to_string(BatchPairing p) { return p == BatchPairing::same ? "same" : "different"; }

Method method_from_string(std::string_view s) {
  if (s == "sgd") return Method::sgd;
  if (s == "sam") return Method::sam;
  if (s == "rwp") return Method::rwp;
  if (s == "arwp") return Method::arwp;
  if (s == "mrwp" || s == "m-rwp") return Method::mrwp;
  if (s == "marwp" || s == "m-arwp") return Method::marwp;
  throw ValidationError("unknown optimizer method '" + std::string(s) + "'");
}

LrSchedule lr_schedule_from_string(std::string_view s) {
  if (s == "constant") return LrSchedule::constant;
  if (s == "cosine_decay" || s == "cosine-decay" || s == "cosine") return LrSchedule::cosine_decay;
  if (s == "inverse_sqrt" || s == "inverse-sqrt") return LrSchedule::inverse_sqrt;
  throw ValidationError("unknown lr schedule '" + std::string(s) + "'");
}

BatchPairing batch_pairing_from_string(std::string_view s) {
  if (s == "same") return BatchPairing::same;
  if (s == "different") return BatchPairing::different;
  throw ValidationError("unknown batch pairing '" + std::string(s) + "'");
}

}  // namespace perturbopt::optim
