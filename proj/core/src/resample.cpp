#include "wavemask/resample.hpp"

#include <algorithm>
#include <cmath>

#include "wavemask/error.hpp"

namespace wavemask {
namespace {

// Source taps for output index `o` along an axis of input length `n`.
struct Tap {
  std::size_t lo, hi;
  double frac;
};

Tap tap_for(std::size_t o, std::size_t n) {
  double s = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(n - 1));
  const auto lo = static_cast<std::size_t>(std::floor(s));
  const std::size_t hi = std::min(lo + 1, n - 1);
  return {lo, hi, s - static_cast<double>(lo)};
}

// a + f (b - a), clamped to [min(a,b), max(a,b)]. Exact for a == b.
double lerp(double a, double b, double f) {
  const double v = a + f * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

Shape with_spatial(const Tensor& like, std::size_t h, std::size_t w) {
  if (like.rank() == 2) return {h, w};
  return {like.dim(0), h, w};
}

}  // namespace

Tensor bilinear_upsample2x(const Tensor& src) {
  if (src.empty()) throw InvalidArgument("bilinear_upsample2x: empty tensor");
  const auto [c, h, w] = as_chw(src, "bilinear_upsample2x");
  Tensor out(with_spatial(src, 2 * h, 2 * w));
  const double* in = src.data().data();
  double* dst = out.data().data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* plane = in + ch * h * w;
    for (std::size_t i = 0; i < 2 * h; ++i) {
      const Tap ty = tap_for(i, h);
      for (std::size_t j = 0; j < 2 * w; ++j) {
        const Tap tx = tap_for(j, w);
        const double top = lerp(plane[ty.lo * w + tx.lo], plane[ty.lo * w + tx.hi], tx.frac);
        const double bot = lerp(plane[ty.hi * w + tx.lo], plane[ty.hi * w + tx.hi], tx.frac);
        dst[(ch * 2 * h + i) * 2 * w + j] = lerp(top, bot, ty.frac);
      }
    }
  }
  return out;
}

Tensor bilinear_upsample2x_adjoint(const Tensor& grad_out) {
  const auto [c, hh, ww] = as_chw(grad_out, "bilinear_upsample2x_adjoint");
  if (hh % 2 || ww % 2) throw InvalidArgument("bilinear_upsample2x_adjoint: gradient dims must be even");
  const std::size_t h = hh / 2, w = ww / 2;
  Tensor out(with_spatial(grad_out, h, w));
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < hh; ++i) {
      const Tap ty = tap_for(i, h);
      for (std::size_t j = 0; j < ww; ++j) {
        const Tap tx = tap_for(j, w);
        const double g = grad_out[(ch * hh + i) * ww + j];
        double* plane = out.data().data() + ch * h * w;
        plane[ty.lo * w + tx.lo] += g * (1.0 - ty.frac) * (1.0 - tx.frac);
        plane[ty.lo * w + tx.hi] += g * (1.0 - ty.frac) * tx.frac;
        plane[ty.hi * w + tx.lo] += g * ty.frac * (1.0 - tx.frac);
        plane[ty.hi * w + tx.hi] += g * ty.frac * tx.frac;
      }
    }
  }
  return out;
}

Tensor avgpool2x(const Tensor& src) {
  if (src.empty()) throw InvalidArgument("avgpool2x: empty tensor");
  const auto [c, h, w] = as_chw(src, "avgpool2x");
  if (h % 2 || w % 2) {
    throw InvalidArgument("avgpool2x: spatial dims must be even, got " + shape_to_string(src.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor out(with_spatial(src, oh, ow));
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* p = src.data().data() + ch * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double s = p[2 * i * w + 2 * j] + p[2 * i * w + 2 * j + 1] + p[(2 * i + 1) * w + 2 * j] +
                         p[(2 * i + 1) * w + 2 * j + 1];
        out[(ch * oh + i) * ow + j] = 0.25 * s;
      }
    }
  }
  return out;
}

Tensor avgpool2x_adjoint(const Tensor& grad_out) {
  const auto [c, oh, ow] = as_chw(grad_out, "avgpool2x_adjoint");
  const std::size_t h = 2 * oh, w = 2 * ow;
  Tensor out(with_spatial(grad_out, h, w));
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        out[(ch * h + i) * w + j] = 0.25 * grad_out[(ch * oh + i / 2) * ow + j / 2];
      }
    }
  }
  return out;
}

}  // namespace wavemask
