#pragma once

#include "wavemask/tensor.hpp"

namespace wavemask {

/// Bilinear 2x upsampling with pixel-center alignment and edge clamping.
/// Output (i, j) samples the input at ((i + 0.5) / 2 - 0.5, (j + 0.5) / 2 - 0.5).
/// Accepts C x h x w or h x w tensors and keeps the rank.
Tensor bilinear_upsample2x(const Tensor& src);

/// Adjoint of bilinear_upsample2x: scatters a 2h x 2w gradient back onto the
/// h x w grid with the same interpolation weights.
Tensor bilinear_upsample2x_adjoint(const Tensor& grad_out);

/// Mean over non-overlapping 2x2 blocks. H and W must be even.
Tensor avgpool2x(const Tensor& src);

/// Adjoint of avgpool2x: each output gradient is spread as g/4 over its block.
Tensor avgpool2x_adjoint(const Tensor& grad_out);

}  // namespace wavemask
