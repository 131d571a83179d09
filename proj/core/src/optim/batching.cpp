#include "perturbopt/optim/batching.hpp"

#include <numeric>
#include <string>

#include "perturbopt/errors.hpp"

namespace perturbopt::optim {

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

EpochStream::EpochStream(std::size_t n, Rng rng) : n_(n), rng_(rng) {
  if (n_ == 0) throw ValidationError("cannot stream an empty dataset");
}

void EpochStream::start_epoch() {
  perm_.resize(n_);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  shuffle_indices(perm_, rng_);
  pos_ = 0;
  ++epoch_;
}

std::vector<std::size_t> EpochStream::take(std::size_t count) {
  if (count == 0 || count > n_) {
    throw ValidationError("cannot take " + std::to_string(count) + " examples from a dataset of " +
                          std::to_string(n_));
  }
  if (remaining() < count) start_epoch();
  std::vector<std::size_t> out(perm_.begin() + static_cast<std::ptrdiff_t>(pos_),
                               perm_.begin() + static_cast<std::ptrdiff_t>(pos_ + count));
  pos_ += count;
  return out;
}

std::size_t examples_per_step(std::size_t batch_size, BatchPairing mode) noexcept {
  return mode == BatchPairing::different ? 2 * batch_size : batch_size;
}

IndexPair next_index_pair(EpochStream& stream, std::size_t batch_size, BatchPairing mode) {
  IndexPair p;
  if (mode == BatchPairing::same) {
    p.b1 = stream.take(batch_size);
    p.b2 = p.b1;
  } else {
    auto both = stream.take(2 * batch_size);
    p.b1.assign(both.begin(), both.begin() + static_cast<std::ptrdiff_t>(batch_size));
    p.b2.assign(both.begin() + static_cast<std::ptrdiff_t>(batch_size), both.end());
  }
  return p;
}

BatchPair next_batch_pair(const nn::Batch& dataset, EpochStream& stream, std::size_t batch_size, BatchPairing mode) {
  const auto idx = next_index_pair(stream, batch_size, mode);
  BatchPair pair;
  pair.b1 = dataset.subset(idx.b1);
  pair.b2 = mode == BatchPairing::same ? pair.b1 : dataset.subset(idx.b2);
  return pair;
}

BatchPair make_batch_pair(const nn::Batch& dataset, std::size_t batch_size, BatchPairing mode, Rng& rng) {
  const std::size_t need = examples_per_step(batch_size, mode);
  if (batch_size == 0 || dataset.size() < need) {
    throw ValidationError("dataset of " + std::to_string(dataset.size()) + " examples cannot supply " +
                          std::to_string(need) + " examples for '" + std::string(to_string(mode)) + "' pairing");
  }
  EpochStream stream(dataset.size(), Rng(rng.next_u64()));
  return next_batch_pair(dataset, stream, batch_size, mode);
}

}  // namespace perturbopt::optim
