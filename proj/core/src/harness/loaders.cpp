#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "perturbopt/errors.hpp"
#include "perturbopt/harness/dataset.hpp"

namespace perturbopt::harness {

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

}  // namespace

nn::Batch load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                   std::optional<std::size_t> limit) {
  const auto img = read_all(images_path);
  const auto lab = read_all(labels_path);
  if (limit && *limit == 0) throw ValidationError("idx limit must be >= 1");
  if (img.size() < 16) throw ValidationError(fmt::format("{}: IDX header truncated", images_path.string()));
  if (lab.size() < 8) throw ValidationError(fmt::format("{}: IDX header truncated", labels_path.string()));
  if (be32(img, 0) != 0x00000803u) {
    throw ValidationError(fmt::format("{}: bad IDX image magic: expected 0x00000803, found 0x{:08x}",
                                      images_path.string(), be32(img, 0)));
  }
  if (be32(lab, 0) != 0x00000801u) {
    throw ValidationError(fmt::format("{}: bad IDX label magic: expected 0x00000801, found 0x{:08x}",
                                      labels_path.string(), be32(lab, 0)));
  }
  std::size_t n = be32(img, 4);
  const std::size_t rows = be32(img, 8);
  const std::size_t cols = be32(img, 12);
  const std::size_t n_labels = be32(lab, 4);
  if (n != n_labels) throw ValidationError(fmt::format("IDX count mismatch: {} images, {} labels", n, n_labels));
  const std::size_t pix = rows * cols;
  if (img.size() != 16 + n * pix) {
    throw ValidationError(fmt::format("IDX image payload: expected {} bytes, found {}", 16 + n * pix, img.size()));
  }
  if (lab.size() != 8 + n) {
    throw ValidationError(fmt::format("IDX label payload: expected {} bytes, found {}", 8 + n, lab.size()));
  }
  if (limit) n = std::min(n, *limit);
  nn::Batch b;
  std::vector<double> x(n * pix);
  for (std::size_t i = 0; i < n * pix; ++i) x[i] = img[16 + i] / 255.0;
  b.inputs = nn::Tensor({n, pix}, std::move(x));
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[8 + i] > 9) throw ValidationError(fmt::format("IDX label {} at index {} out of range", int{lab[8 + i]}, i));
    b.labels[i] = lab[8 + i];
  }
  return b;
}

nn::Batch load_cifar_binary(const std::filesystem::path& path, std::optional<std::size_t> limit) {
  constexpr std::size_t kPixels = 3 * 32 * 32;
  constexpr std::size_t kRecord = 1 + kPixels;
  if (limit && *limit == 0) throw ValidationError("cifar limit must be >= 1");
  const auto raw = read_all(path);
  if (raw.empty() || raw.size() % kRecord != 0) {
    throw ValidationError(
        fmt::format("{}: size {} is not a multiple of the {}-byte record", path.string(), raw.size(), kRecord));
  }
  std::size_t n = raw.size() / kRecord;
  if (limit) n = std::min(n, *limit);
  nn::Batch b;
  std::vector<double> x(n * kPixels);
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char label = raw[i * kRecord];
    if (label > 9) throw ValidationError(fmt::format("CIFAR label {} at record {} out of range", int{label}, i));
    b.labels[i] = label;
    for (std::size_t p = 0; p < kPixels; ++p) x[i * kPixels + p] = raw[i * kRecord + 1 + p] / 255.0;
  }
  b.inputs = nn::Tensor({n, 3, 32, 32}, std::move(x));
  return b;
}

}  // namespace perturbopt::harness
