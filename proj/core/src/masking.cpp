#include "wavemask/masking.hpp"

#include <algorithm>
#include <cmath>

#include "wavemask/error.hpp"

namespace wavemask {

void MaskSchedule::validate() const {
  if (T < 1) throw InvalidArgument("mask schedule: T must be >= 1, got " + std::to_string(T));
  if (!(lower_bound >= 0.0 && lower_bound <= 1.0)) {
    throw InvalidArgument("mask schedule: lower bound must lie in [0, 1], got " + std::to_string(lower_bound));
  }
}

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (double v : mask.data()) n += v != 0.0;
  return n;
}

BinaryMask mask_at(const Tensor& saliency, const MaskSchedule& sched, std::int64_t t) {
  sched.validate();
  if (t < 1 || t > sched.T) {
    throw InvalidArgument("mask_at: t must lie in [1, " + std::to_string(sched.T) + "], got " + std::to_string(t));
  }
  const double total = static_cast<double>(sched.T);
  const double step = static_cast<double>(t);
  Tensor mask(saliency.shape());
  for (std::size_t k = 0; k < saliency.size(); ++k) {
    mask[k] = total * (saliency[k] + sched.lower_bound) >= step ? 1.0 : 0.0;
  }
  return {std::move(mask), t};
}

BinaryMask mask_at(const SaliencyMap& saliency, const MaskSchedule& sched, std::int64_t t) {
  return mask_at(saliency.map, sched, t);
}

std::int64_t discrete_timestep(double tau, std::int64_t T) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("discrete_timestep: tau must lie in [0, 1]");
  const auto t = static_cast<std::int64_t>(std::ceil(tau * static_cast<double>(T)));
  return std::clamp<std::int64_t>(t, 1, T);
}

Tensor coverage_fraction(const Tensor& saliency, const MaskSchedule& sched) {
  sched.validate();
  Tensor out(saliency.shape());
  for (std::size_t k = 0; k < saliency.size(); ++k) out[k] = std::min(1.0, saliency[k] + sched.lower_bound);
  return out;
}

Tensor coverage_count(const Tensor& saliency, const MaskSchedule& sched) {
  sched.validate();
  Tensor counts(saliency.shape());
  for (std::int64_t t = 1; t <= sched.T; ++t) {
    const BinaryMask m = mask_at(saliency, sched, t);
    counts += m.mask;
  }
  return counts;
}

}  // namespace wavemask
