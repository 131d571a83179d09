#pragma once

#include <cstddef>
#include <string_view>

#include "perturbopt/perturb/perturb.hpp"

namespace perturbopt::optim {

enum class Method { sgd, sam, rwp, arwp, mrwp, marwp };
enum class LrSchedule { constant, cosine_decay, inverse_sqrt };
enum class BatchPairing { same, different };

struct OptimizerConfig {
  Method method = Method::sgd;
  double gamma0 = 0.1;
  LrSchedule lr_schedule = LrSchedule::cosine_decay;
  double lambda = 0.5;
  BatchPairing batch_pairing = BatchPairing::same;
  std::size_t m_sharpness = 0;
  double momentum = 0.0;
  double weight_decay = 0.0;
  perturb::PerturbConfig perturb;

  /// Throws ValidationError on out-of-range fields. When `batch_size` is
  /// non-zero also checks that m_sharpness divides it.
  void validate(std::size_t batch_size = 0) const;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Whether the method mixes a perturbed and a clean gradient.
bool is_mixed(Method m) noexcept;
/// Whether the method keeps gradient history for adaptive perturbations.
bool is_adaptive(Method m) noexcept;
/// Whether the step consumes two batches when pairing is "different".
bool uses_batch_pairing(Method m) noexcept;
/// Gradient evaluations charged per optimizer step: 1 for sgd/rwp/arwp,
/// 2 for sam/mrwp/marwp.
std::size_t gradient_evaluations_per_step(Method m) noexcept;

/// Step size for iteration t in [1, T]:
///   constant      gamma0
///   cosine_decay  gamma0 * (1 + cos(pi (t - 1) / T)) / 2
///   inverse_sqrt  gamma0 / sqrt(t)
double lr_at(std::size_t t, std::size_t total, const OptimizerConfig& cfg);

std::string_view to_string(Method m);
std::string_view to_string(LrSchedule s);
std::string_view to_string(BatchPairing p);
Method method_from_string(std::string_view s);
LrSchedule lr_schedule_from_string(std::string_view s);
BatchPairing batch_pairing_from_string(std::string_view s);

}  // namespace perturbopt::optim
