#include "wavemask/wavelet.hpp"

#include "wavemask/error.hpp"

namespace wavemask {
namespace {

Shape half_shape(const Tensor& like, std::size_t h, std::size_t w) {
  if (like.rank() == 2) return {h, w};
  return {like.dim(0), h, w};
}

}  // namespace

double WaveletPyramid::energy() const {
  double e = top_ll.sum_squares();
  for (const auto& lvl : levels) e += lvl.lh.sum_squares() + lvl.hl.sum_squares() + lvl.hh.sum_squares();
  return e;
}

SubbandSet dwt2(const Tensor& src) {
  const auto [c, h, w] = as_chw(src, "dwt2");
  if (h % 2 || w % 2) {
    throw InvalidArgument("dwt2: spatial dims must be even, got " + shape_to_string(src.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  const Shape out_shape = half_shape(src, oh, ow);
  SubbandSet out{Tensor(out_shape), Tensor(out_shape), Tensor(out_shape), Tensor(out_shape)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* p = src.data().data() + ch * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double a = p[2 * i * w + 2 * j];
        const double b = p[2 * i * w + 2 * j + 1];
        const double cc = p[(2 * i + 1) * w + 2 * j];
        const double d = p[(2 * i + 1) * w + 2 * j + 1];
        const std::size_t k = (ch * oh + i) * ow + j;
        out.ll[k] = 0.5 * (a + b + cc + d);
        out.hl[k] = 0.5 * (a - b + cc - d);
        out.lh[k] = 0.5 * (a + b - cc - d);
        out.hh[k] = 0.5 * (a - b - cc + d);
      }
    }
  }
  return out;
}

Tensor idwt2(const SubbandSet& bands) {
  const Shape& s = bands.ll.shape();
  if (bands.lh.shape() != s || bands.hl.shape() != s || bands.hh.shape() != s) {
    throw InvalidArgument("idwt2: subband shapes differ (ll " + shape_to_string(s) + ", lh " +
                          shape_to_string(bands.lh.shape()) + ", hl " + shape_to_string(bands.hl.shape()) + ", hh " +
                          shape_to_string(bands.hh.shape()) + ")");
  }
  const auto [c, oh, ow] = as_chw(bands.ll, "idwt2");
  const std::size_t h = 2 * oh, w = 2 * ow;
  Tensor out(half_shape(bands.ll, h, w));
  for (std::size_t ch = 0; ch < c; ++ch) {
    double* p = out.data().data() + ch * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t k = (ch * oh + i) * ow + j;
        const double ll = bands.ll[k], lh = bands.lh[k], hl = bands.hl[k], hh = bands.hh[k];
        p[2 * i * w + 2 * j] = 0.5 * (ll + hl + lh + hh);
        p[2 * i * w + 2 * j + 1] = 0.5 * (ll - hl + lh - hh);
        p[(2 * i + 1) * w + 2 * j] = 0.5 * (ll + hl - lh - hh);
        p[(2 * i + 1) * w + 2 * j + 1] = 0.5 * (ll - hl - lh + hh);
      }
    }
  }
  return out;
}

std::size_t max_dwt_depth(const Tensor& src) {
  auto [c, h, w] = as_chw(src, "max_dwt_depth");
  (void)c;
  std::size_t depth = 0;
  while (h % 2 == 0 && w % 2 == 0) {
    h /= 2;
    w /= 2;
    ++depth;
  }
  return depth;
}

WaveletPyramid dwt2_multi(const Tensor& src, std::size_t depth) {
  if (depth == 0) throw InvalidArgument("dwt2_multi: depth must be >= 1");
  const std::size_t legal = max_dwt_depth(src);
  if (depth > legal) {
    throw InvalidArgument("dwt2_multi: shape " + shape_to_string(src.shape()) + " does not support depth " +
                          std::to_string(depth) + "; maximum legal depth is " + std::to_string(legal));
  }
  WaveletPyramid pyr;
  pyr.levels.reserve(depth);
  Tensor current = src;
  for (std::size_t l = 0; l < depth; ++l) {
    SubbandSet bands = dwt2(current);
    pyr.levels.push_back({std::move(bands.lh), std::move(bands.hl), std::move(bands.hh)});
    current = std::move(bands.ll);
  }
  pyr.top_ll = std::move(current);
  return pyr;
}

Tensor idwt2_multi(const WaveletPyramid& pyramid) {
  Tensor current = pyramid.top_ll;
  for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it) {
    current = idwt2({std::move(current), it->lh, it->hl, it->hh});
  }
  return current;
}

}  // namespace wavemask
