#pragma once

#include <array>
#include <cstdint>

#include "wavemask/tensor.hpp"

namespace wavemask {

/// xoshiro256++ seeded through splitmix64.
///
/// The stream depends only on the 64-bit seed, so results are reproducible on
/// every platform. Single owner: do not share one instance across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n) noexcept;
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// i.i.d. N(0, 1) entries drawn in row-major order.
Tensor gaussian_sample(Rng& rng, const Shape& shape);

}  // namespace wavemask
