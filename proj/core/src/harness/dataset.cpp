#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/harness/dataset.hpp"
#include "perturbopt/nn/tensor.hpp"
#include "perturbopt/optim/batching.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::harness {

namespace {

void check_noise(double frac) {
  if (!(frac >= 0.0 && frac <= 0.5)) throw ValidationError("label_noise_frac must lie in [0, 0.5]");
}

struct Labeled {
  std::vector<double> x;  // n x dim
  std::vector<std::int32_t> y;
  std::size_t dim = 0;
};

Labeled two_moons(const TwoMoons& s, Rng& rng) {
  Labeled out;
  out.dim = 2;
  const std::size_t upper = (s.n + 1) / 2;
  for (std::size_t i = 0; i < s.n; ++i) {
    const double theta = std::numbers::pi * rng.uniform();
    double x = 0.0;
    double y = 0.0;
    std::int32_t label = 0;
    if (i < upper) {
      x = std::cos(theta);
      y = std::sin(theta);
    } else {
      x = 1.0 - std::cos(theta);
      y = 0.5 - std::sin(theta);
      label = 1;
    }
    out.x.push_back(x + s.noise_std * rng.normal());
    out.x.push_back(y + s.noise_std * rng.normal());
    out.y.push_back(label);
  }
  return out;
}

Labeled blobs(const Blobs& s, Rng& rng) {
  Labeled out;
  out.dim = s.dim;
  std::vector<double> centers(s.classes * s.dim);
  for (auto& c : centers) c = rng.uniform(-5.0, 5.0);
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto label = static_cast<std::int32_t>(i % s.classes);
    for (std::size_t k = 0; k < s.dim; ++k) {
      out.x.push_back(centers[static_cast<std::size_t>(label) * s.dim + k] + s.spread * rng.normal());
    }
    out.y.push_back(label);
  }
  return out;
}

std::size_t train_count(std::size_t n, double fraction) {
  auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  n_train = std::max<std::size_t>(1, std::min(n_train, n - 1));
  return n_train;
}

Dataset split(const nn::Batch& all, double fraction, std::size_t classes) {
  const std::size_t n = all.size();
  if (n < 2) throw ValidationError("dataset needs at least 2 examples to split");
  const std::size_t n_train = train_count(n, fraction);
  Dataset d;
  d.train = all.slice(0, n_train);
  d.test = all.slice(n_train, n - n_train);
  d.num_classes = classes;
  d.clean_train_labels = d.train.labels;
  return d;
}

void inject_label_noise(Dataset& d, double frac, Rng& rng) {
  const std::size_t n_train = d.train.size();
  const auto flips = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n_train)));
  if (flips == 0 || d.num_classes < 2) return;
  std::vector<std::size_t> idx(n_train);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  optim::shuffle_indices(idx, rng);
  for (std::size_t k = 0; k < flips; ++k) {
    auto& label = d.train.labels[idx[k]];
    const auto shift = 1 + static_cast<std::int32_t>(rng.below(d.num_classes - 1));
    label = static_cast<std::int32_t>((label + shift) % static_cast<std::int32_t>(d.num_classes));
  }
  d.flipped_labels = flips;
}

Dataset from_labeled(Labeled data, std::size_t classes, double fraction, double noise, Rng& rng) {
  const std::size_t n = data.y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  optim::shuffle_indices(order, rng);
  nn::Batch all;
  all.inputs = nn::Tensor({n, data.dim}, std::move(data.x));
  all.labels = std::move(data.y);
  Dataset d = split(all.subset(order), fraction, classes);
  inject_label_noise(d, noise, rng);
  return d;
}

}  // namespace

void DatasetSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("train_fraction must lie in (0, 1)");
  if (const auto* m = std::get_if<TwoMoons>(&source)) {
    if (m->n < 4) throw ValidationError("two_moons needs n >= 4");
    if (!(m->noise_std >= 0.0)) throw ValidationError("noise_std must be >= 0");
    check_noise(m->label_noise_frac);
  } else if (const auto* b = std::get_if<Blobs>(&source)) {
    if (b->n < 4) throw ValidationError("blobs needs n >= 4");
    if (b->classes < 2) throw ValidationError("blobs needs at least 2 classes");
    if (b->dim < 1) throw ValidationError("blobs needs dim >= 1");
    check_noise(b->label_noise_frac);
  } else if (const auto* q = std::get_if<Quadratic>(&source)) {
    if (q->d < 1) throw ValidationError("quadratic needs d >= 1");
    if (!(q->condition_number >= 1.0)) throw ValidationError("condition_number must be >= 1");
    if (!(q->beta > 0.0)) throw ValidationError("quadratic beta must be > 0");
  } else if (const auto* i = std::get_if<IdxFiles>(&source)) {
    if (i->limit && *i->limit == 0) throw ValidationError("idx limit must be >= 1");
  } else if (const auto* c = std::get_if<CifarBinary>(&source)) {
    if (c->limit && *c->limit == 0) throw ValidationError("cifar limit must be >= 1");
  }
}

nn::Batch unit_batch() {
  nn::Batch b;
  b.inputs = nn::Tensor({1, 1}, {0.0});
  return b;
}

QuadraticProblem make_quadratic(const Quadratic& q) {
  QuadraticProblem p;
  p.d = q.d;
  const std::size_t d = q.d;
  p.eigenvalues.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double frac = d == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    p.eigenvalues[i] = q.beta * std::pow(q.condition_number, frac - 1.0);
  }
  p.eigenvalues.back() = q.beta;

  // Random orthogonal Q (columns) by modified Gram-Schmidt on a Gaussian matrix.
  Rng rng(q.seed);
  std::vector<std::vector<double>> cols(d, std::vector<double>(d));
  for (std::size_t c = 0; c < d; ++c) {
    for (;;) {
      for (auto& x : cols[c]) x = rng.normal();
      for (std::size_t prev = 0; prev < c; ++prev) nn::axpy(-nn::dot(cols[prev], cols[c]), cols[prev], cols[c]);
      for (std::size_t prev = 0; prev < c; ++prev) nn::axpy(-nn::dot(cols[prev], cols[c]), cols[prev], cols[c]);
      const double nrm = nn::norm(cols[c]);
      if (nrm > 1e-8) {
        for (auto& x : cols[c]) x /= nrm;
        break;
      }
    }
  }
  p.matrix.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += cols[k][i] * p.eigenvalues[k] * cols[k][j];
      p.matrix[i * d + j] = s;
    }
  }
  // Exact symmetry.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) p.matrix[j * d + i] = p.matrix[i * d + j];
  }
  p.w0.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) nn::axpy(1.0, cols[k], p.w0);
  return p;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  if (const auto* m = std::get_if<TwoMoons>(&spec.source)) {
    Rng rng(m->seed);
    return from_labeled(two_moons(*m, rng), 2, spec.train_fraction, m->label_noise_frac, rng);
  }
  if (const auto* b = std::get_if<Blobs>(&spec.source)) {
    Rng rng(b->seed);
    return from_labeled(blobs(*b, rng), b->classes, spec.train_fraction, b->label_noise_frac, rng);
  }
  if (const auto* q = std::get_if<Quadratic>(&spec.source)) {
    Dataset d;
    d.train = unit_batch();
    d.test = unit_batch();
    d.quadratic = make_quadratic(*q);
    return d;
  }
  if (const auto* i = std::get_if<IdxFiles>(&spec.source)) {
    return split(load_idx(i->images_path, i->labels_path, i->limit), spec.train_fraction, 10);
  }
  const auto& c = std::get<CifarBinary>(spec.source);
  return split(load_cifar_binary(c.path, c.limit), spec.train_fraction, 10);
}

}  // namespace perturbopt::harness
