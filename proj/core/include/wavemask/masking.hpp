#pragma once

#include <cstdint>

#include "wavemask/saliency.hpp"
#include "wavemask/tensor.hpp"

namespace wavemask {

/// Total timesteps T and supervision floor l. Every location is supervised
/// for at least floor(l * T) of the T steps.
struct MaskSchedule {
  std::int64_t T = 1000;
  double lower_bound = 0.3;

  /// Throws InvalidArgument unless T >= 1 and 0 <= lower_bound <= 1.
  void validate() const;
};

struct BinaryMask {
  Tensor mask;  // H x W, entries exactly 0 or 1
  std::int64_t t = 0;

  double fraction() const { return mask.mean(); }
  std::size_t count() const;
};

/// M_t(i, j) = 1 iff T * (A(i, j) + l) >= t, for t in [1, T].
BinaryMask mask_at(const SaliencyMap& saliency, const MaskSchedule& sched, std::int64_t t);
BinaryMask mask_at(const Tensor& saliency, const MaskSchedule& sched, std::int64_t t);

/// Continuous flow time tau in [0, 1] to the discrete step ceil(tau * T),
/// with tau = 0 mapping to 1.
std::int64_t discrete_timestep(double tau, std::int64_t T);

/// Expected fraction of supervised steps per location: min(1, A + l).
Tensor coverage_fraction(const Tensor& saliency, const MaskSchedule& sched);

/// Number of t in [1, T] with mask 1 at each location, by exhaustive sweep.
Tensor coverage_count(const Tensor& saliency, const MaskSchedule& sched);

}  // namespace wavemask
