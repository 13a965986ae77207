#include "wavemask/saliency.hpp"

#include <algorithm>

#include "wavemask/error.hpp"
#include "wavemask/resample.hpp"
#include "wavemask/wavelet.hpp"

namespace wavemask {

Tensor energy_map(const Tensor& z) {
  const auto [c, h, w] = as_chw(z, "energy_map");
  const SubbandSet bands = dwt2(z);
  const std::size_t oh = h / 2, ow = w / 2, plane = oh * ow;
  Tensor energy({oh, ow});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t p = 0; p < plane; ++p) {
      const std::size_t k = ch * plane + p;
      energy[p] += bands.lh[k] * bands.lh[k] + bands.hl[k] * bands.hl[k] + bands.hh[k] * bands.hh[k];
    }
  }
  energy *= 1.0 / static_cast<double>(c);
  return energy;
}

SaliencyMap normalize_saliency(const Tensor& energy, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("normalize_saliency: epsilon must be > 0");
  if (energy.rank() != 2) {
    throw InvalidArgument("normalize_saliency: expected an h x w energy map, got " + shape_to_string(energy.shape()));
  }
  Tensor map = bilinear_upsample2x(energy);
  const double lo = map.min();
  const double denom = map.max() - lo + epsilon;
  for (double& v : map.data()) v = std::clamp((v - lo) / denom, 0.0, 1.0);
  return {std::move(map), {1, energy.dim(0) * 2, energy.dim(1) * 2}, epsilon};
}

SaliencyMap saliency_from_latent(const Tensor& z, double epsilon) {
  SaliencyMap out = normalize_saliency(energy_map(z), epsilon);
  out.source_shape = z.shape();
  return out;
}

}  // namespace wavemask
