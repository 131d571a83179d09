#include "perturbopt/analysis/perturbed_loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perturbopt/analysis/parallel.hpp"
#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::analysis {

namespace {

double loss_at(const nn::Objective& obj, const nn::ParamVector& w, std::span<const double> eps,
               const nn::Batch& data) {
  std::vector<double> p(w.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = w.values[i] + eps[i];
  return obj.loss(p, data);
}

double awp_loss(const nn::Objective& obj, const nn::ParamVector& w, const AwpSampler& s, const nn::Batch& data) {
  std::vector<double> grad(w.size());
  if (s.full_data || s.batch_size >= data.size()) {
    obj.loss_and_grad(w.span(), data, grad);
    const auto eps = perturb::awp_direction(grad, s.rho);
    return loss_at(obj, w, eps.epsilon, data);
  }
  if (s.batch_size == 0) throw ValidationError("AWP batch size must be positive");
  double total = 0.0;
  for (std::size_t begin = 0; begin < data.size(); begin += s.batch_size) {
    const std::size_t count = std::min(s.batch_size, data.size() - begin);
    const nn::Batch chunk = data.slice(begin, count);
    obj.loss_and_grad(w.span(), chunk, grad);
    const auto eps = perturb::awp_direction(grad, s.rho);
    total += loss_at(obj, w, eps.epsilon, chunk) * static_cast<double>(count);
  }
  return total / static_cast<double>(data.size());
}

PerturbedLoss summarize(std::vector<double> samples) {
  PerturbedLoss out;
  out.n_samples = samples.size();
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double delta = samples[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (samples[i] - mean);
  }
  out.mean = mean;
  if (samples.size() > 1) {
    const double var = m2 / static_cast<double>(samples.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  out.median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return out;
}

}  // namespace

PerturbedLoss expected_perturbed_loss(const nn::Objective& obj, const nn::ParamVector& w, const Sampler& sampler,
                                      const nn::Batch& data, std::size_t n_samples, std::uint64_t seed,
                                      unsigned workers) {
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  if (const auto* a = std::get_if<AwpSampler>(&sampler)) return summarize({awp_loss(obj, w, *a, data)});
  const auto& r = std::get<RwpSampler>(sampler);
  std::vector<double> samples(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    Rng rng = Rng::substream(seed, i);
    const auto eps = perturb::sample_rwp(w, r.sigma, rng, r.distribution);
    samples[i] = loss_at(obj, w, eps.epsilon, data);
  });
  return summarize(std::move(samples));
}

double sigma_for_radius(const nn::ParamVector& w, double radius) {
  double second_moment = 0.0;
  for (std::size_t j = 0; j < w.layout.k(); ++j) {
    const double sq = nn::squared_norm(w.group(j));
    if (std::sqrt(sq) < perturb::kZeroNormThreshold) continue;
    second_moment += static_cast<double>(w.layout.groups[j].length) * sq;
  }
  if (!(second_moment > 0.0)) throw ValidationError("cannot match a radius for an all-zero weight vector");
  return radius / std::sqrt(second_moment);
}

SweepResult radius_sweep(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                         const std::vector<double>& radii, std::size_t n_samples, std::uint64_t seed,
                         unsigned workers) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw ValidationError("radii must be positive and strictly ascending");
    }
  }
  SweepResult out;
  out.radii = radii;
  out.n_samples = n_samples;
  for (double r : radii) {
    const double sigma = sigma_for_radius(w, r);
    const auto awp = expected_perturbed_loss(obj, w, AwpSampler{r, true, 256}, data, 1, seed, workers);
    const auto rwp = expected_perturbed_loss(obj, w, RwpSampler{sigma, perturb::Distribution::filter_wise}, data,
                                             n_samples, seed, workers);
    out.awp_loss.push_back(awp.mean);
    out.rwp_loss.push_back(rwp.mean);
    out.rwp_stderr.push_back(rwp.std_error);
    out.rwp_median.push_back(rwp.median);
    out.rwp_sigma.push_back(sigma);
  }
  return out;
}

double rwp_radius_for_loss(const nn::Objective& obj, const nn::ParamVector& w, const nn::Batch& data,
                           double target_loss, std::size_t n_samples, std::uint64_t seed, double lo, double hi,
                           unsigned workers) {
  if (!(lo > 0.0 && hi > lo)) throw ValidationError("radius bracket must satisfy 0 < lo < hi");
  auto mean_at = [&](double r) {
    return expected_perturbed_loss(obj, w, RwpSampler{sigma_for_radius(w, r), perturb::Distribution::filter_wise},
                                   data, n_samples, seed, workers)
        .mean;
  };
  if (mean_at(hi) < target_loss) return hi;
  if (mean_at(lo) >= target_loss) return lo;
  for (int it = 0; it < 40 && hi / lo > 1.0 + 1e-6; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mean_at(mid) >= target_loss) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {std::pow(10.0, lo_exp)};
  for (std::size_t i = 0; i < count; ++i) {
    const double e = lo_exp + (hi_exp - lo_exp) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

}  // namespace perturbopt::analysis
