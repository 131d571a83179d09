#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace perturbopt {

/// SplitMix64 finalizer. Used to expand seeds and derive substream keys.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seedable 64-bit generator (xoshiro256**) with splittable substreams.
///
/// The state is seeded through SplitMix64 so that any 64-bit seed, including
/// zero, produces a well-mixed state. `substream(seed, index)` derives an
/// independent generator for `index` without touching the parent, which lets
/// callers assign one stream per filter group or per Monte-Carlo sample and
/// keep draws stable when the number of groups or workers changes.
///
/// Gaussian variates use the Marsaglia polar method on top of `uniform()`, so
/// the sequence is fully specified by this class and does not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  static Rng substream(std::uint64_t seed, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u64(); }
  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal variate.
  double normal() noexcept;

  bool operator==(const Rng&) const = default;

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace perturbopt
