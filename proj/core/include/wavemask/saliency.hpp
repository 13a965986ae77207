#pragma once

#include "wavemask/tensor.hpp"

namespace wavemask {

inline constexpr double kSaliencyEpsilon = 1e-8;

/// Per-sample wavelet-energy saliency, values in [0, 1] at full latent
/// resolution. Constant-energy inputs give an all-zero map.
struct SaliencyMap {
  Tensor map;         // H x W
  Shape source_shape;  // shape of the latent it came from
  double epsilon = kSaliencyEpsilon;
};

/// Localized high-frequency energy of a single-level Haar transform:
///   E(i, j) = mean over channels of lh^2 + hl^2 + hh^2.
/// Input C x H x W (or H x W); output H/2 x W/2.
Tensor energy_map(const Tensor& z);

/// Upsamples E 2x bilinearly, then min-max normalizes it with one min/max per
/// map: A = (E - min) / (max - min + epsilon).
SaliencyMap normalize_saliency(const Tensor& energy, double epsilon = kSaliencyEpsilon);

/// energy_map -> bilinear_upsample2x -> min-max normalize.
SaliencyMap saliency_from_latent(const Tensor& z, double epsilon = kSaliencyEpsilon);

}  // namespace wavemask
