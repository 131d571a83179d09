#pragma once

#include <cstddef>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/optim/config.hpp"
#include "perturbopt/optim/steps.hpp"
#include "perturbopt/rng.hpp"

namespace perturbopt::optim {

/// In-place Fisher-Yates shuffle driven by `rng`.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng);

/// Stream of example indices drawn epoch by epoch from shuffled permutations
/// of [0, n). Within one epoch no index repeats; the remainder that cannot
/// fill a request is dropped and a fresh permutation starts.
class EpochStream {
 public:
  EpochStream(std::size_t n, Rng rng);

  std::vector<std::size_t> take(std::size_t count);
  /// Discards the rest of the current permutation.
  void start_epoch();

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t remaining() const noexcept { return perm_.size() - pos_; }

 private:
  std::size_t n_;
  Rng rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
};

/// Index sets of one batch pair. For "same" pairing b2 == b1.
struct IndexPair {
  std::vector<std::size_t> b1;
  std::vector<std::size_t> b2;
};

IndexPair next_index_pair(EpochStream& stream, std::size_t batch_size, BatchPairing mode);

BatchPair next_batch_pair(const nn::Batch& dataset, EpochStream& stream, std::size_t batch_size, BatchPairing mode);

/// Draws one pair from a fresh shuffle of `dataset`. "different" returns two
/// disjoint batches. Throws ValidationError when the dataset is too small.
BatchPair make_batch_pair(const nn::Batch& dataset, std::size_t batch_size, BatchPairing mode, Rng& rng);

/// Examples consumed per step: batch_size, doubled for "different" pairing.
std::size_t examples_per_step(std::size_t batch_size, BatchPairing mode) noexcept;

}  // namespace perturbopt::optim
