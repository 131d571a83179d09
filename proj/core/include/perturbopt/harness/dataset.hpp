#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "perturbopt/nn/batch.hpp"
#include "perturbopt/nn/objective.hpp"

namespace perturbopt::harness {

/// Two interleaving half-circles in 2-D, labels 0 (upper) and 1 (lower).
struct TwoMoons {
  std::size_t n = 1000;
  double noise_std = 0.1;
  double label_noise_frac = 0.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters around seeded centres in [-5, 5]^dim.
struct Blobs {
  std::size_t n = 600;
  std::size_t classes = 3;
  double spread = 1.0;
  std::uint64_t seed = 0;
  std::size_t dim = 2;
  double label_noise_frac = 0.0;
};

/// Synthetic objective 0.5 w^T A w with A = Q diag(lambda) Q^T,
/// lambda log-spaced on [beta / condition_number, beta], Q seeded random
/// orthogonal. Training starts from w0 = Q * 1.
struct Quadratic {
  std::size_t d = 10;
  double condition_number = 100.0;
  std::uint64_t seed = 0;
  double beta = 1.0;
};

struct IdxFiles {
  std::filesystem::path images_path;
  std::filesystem::path labels_path;
  std::optional<std::size_t> limit;
};

struct CifarBinary {
  std::filesystem::path path;
  std::optional<std::size_t> limit;
};

using DataSource = std::variant<TwoMoons, Blobs, Quadratic, IdxFiles, CifarBinary>;

struct DatasetSpec {
  DataSource source = TwoMoons{};
  double train_fraction = 0.8;

  void validate() const;
  bool is_quadratic() const noexcept { return std::holds_alternative<Quadratic>(source); }
};

struct QuadraticProblem {
  std::size_t d = 0;
  std::vector<double> matrix;       ///< row-major d x d
  std::vector<double> eigenvalues;  ///< ascending
  std::vector<double> w0;
};

struct Dataset {
  nn::Batch train;
  nn::Batch test;
  std::size_t num_classes = 0;
  std::size_t flipped_labels = 0;
  std::vector<std::int32_t> clean_train_labels;  ///< labels before noise injection
  std::optional<QuadraticProblem> quadratic;
};

/// Deterministic given the source seed. Label noise flips
/// floor(label_noise_frac * n_train) training labels to a different class;
/// test labels stay clean.
Dataset generate_dataset(const DatasetSpec& spec);

QuadraticProblem make_quadratic(const Quadratic& q);

/// Placeholder batch for objectives that ignore data.
nn::Batch unit_batch();

/// IDX images (magic 0x00000803) and labels (magic 0x00000801), pixels
/// scaled to [0, 1], inputs shaped (n, rows * cols).
nn::Batch load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                   std::optional<std::size_t> limit = std::nullopt);

/// CIFAR-10 binary records (1 label byte + 3072 channel-major pixel bytes),
/// inputs shaped (n, 3, 32, 32) scaled to [0, 1].
nn::Batch load_cifar_binary(const std::filesystem::path& path, std::optional<std::size_t> limit = std::nullopt);

}  // namespace perturbopt::harness
