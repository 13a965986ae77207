#pragma once

#include <cstddef>
#include <vector>

#include "wavemask/tensor.hpp"

namespace wavemask {

/// One level of the orthonormal 2D Haar transform. For each 2x2 block
/// [[a, b], [c, d]] of each channel:
///   ll = (a + b + c + d) / 2     hl = (a - b + c - d) / 2
///   lh = (a + b - c - d) / 2     hh = (a - b - c + d) / 2
/// so lh responds to row differences and hl to column differences.
struct SubbandSet {
  Tensor ll, lh, hl, hh;
};

struct DetailBands {
  Tensor lh, hl, hh;
};

/// Multi-level decomposition. levels[0] is the finest level (level 1);
/// top_ll is the approximation left after the last level.
struct WaveletPyramid {
  std::vector<DetailBands> levels;
  Tensor top_ll;

  std::size_t depth() const noexcept { return levels.size(); }
  /// Sum of squares of every coefficient; equals the input energy.
  double energy() const;
};

/// Odd spatial dims are rejected, never padded.
SubbandSet dwt2(const Tensor& src);
Tensor idwt2(const SubbandSet& bands);

/// Largest L such that both spatial dims are divisible by 2^L.
std::size_t max_dwt_depth(const Tensor& src);

WaveletPyramid dwt2_multi(const Tensor& src, std::size_t depth);
Tensor idwt2_multi(const WaveletPyramid& pyramid);

}  // namespace wavemask
