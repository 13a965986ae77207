#pragma once

// Straight-line reimplementations of the frequency metrics. They share no
// code with the library: the Haar split uses explicit filter taps, window
// statistics use one-pass moment sums and the pyramid is rebuilt by hand.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace wavemask::oracle {

using Plane = std::vector<std::vector<double>>;

inline Plane zeros(std::size_t h, std::size_t w) { return Plane(h, std::vector<double>(w, 0.0)); }

struct Haar {
  Plane ll, lh, hl, hh;
};

inline Haar haar(const Plane& x) {
  const std::size_t h = x.size() / 2, w = x[0].size() / 2;
  const double r = std::sqrt(0.5);
  Haar out{zeros(h, w), zeros(h, w), zeros(h, w), zeros(h, w)};
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double a = x[2 * i][2 * j], b = x[2 * i][2 * j + 1];
      const double c = x[2 * i + 1][2 * j], d = x[2 * i + 1][2 * j + 1];
      const double top_lo = r * (a + b), top_hi = r * (a - b);
      const double bot_lo = r * (c + d), bot_hi = r * (c - d);
      out.ll[i][j] = r * (top_lo + bot_lo);
      out.lh[i][j] = r * (top_lo - bot_lo);
      out.hl[i][j] = r * (top_hi + bot_hi);
      out.hh[i][j] = r * (top_hi - bot_hi);
    }
  }
  return out;
}

struct Ssim {
  double ssim, cs;
};

inline Ssim window_ssim(const Plane& a, const Plane& b, double range, std::size_t win) {
  const std::size_t h = a.size(), w = a[0].size();
  win = std::min({win, h, w});
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  const double n = static_cast<double>(win * win);
  double ssim = 0.0, cs = 0.0, count = 0.0;
  for (std::size_t i = 0; i + win <= h; ++i) {
    for (std::size_t j = 0; j + win <= w; ++j) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t y = 0; y < win; ++y) {
        for (std::size_t x = 0; x < win; ++x) {
          const double p = a[i + y][j + x], q = b[i + y][j + x];
          sa += p, sb += q, saa += p * p, sbb += q * q, sab += p * q;
        }
      }
      const double ma = sa / n, mb = sb / n;
      const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
      const double c = (2 * cov + c2) / (va + vb + c2);
      ssim += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1) * c;
      cs += c;
      count += 1;
    }
  }
  return {ssim / count, cs / count};
}

inline double wqs(const Plane& gen, const Plane& real, std::size_t depth, double lambda_q) {
  const double weight = 1.0 / static_cast<double>(4 * depth);
  double score = 0.0;
  Plane g = gen, r = real;
  for (std::size_t level = 0; level < depth; ++level) {
    const Haar hg = haar(g), hr = haar(r);
    const std::array<std::pair<const Plane*, const Plane*>, 4> bands = {
        {{&hg.ll, &hr.ll}, {&hg.lh, &hr.lh}, {&hg.hl, &hr.hl}, {&hg.hh, &hr.hh}}};
    for (const auto& [pg, pr] : bands) {
      double lo = (*pr)[0][0], hi = lo;
      for (const auto& row : *pr)
        for (double v : row) lo = std::min(lo, v), hi = std::max(hi, v);
      const double range = hi - lo == 0.0 ? 1.0 : hi - lo;
      double mse = 0.0, n = 0.0;
      for (std::size_t i = 0; i < pg->size(); ++i)
        for (std::size_t j = 0; j < (*pg)[0].size(); ++j) {
          mse += std::pow(((*pg)[i][j] - (*pr)[i][j]) / range, 2);
          n += 1;
        }
      score += weight * (window_ssim(*pg, *pr, range, 7).ssim - lambda_q * mse / n);
    }
    g = hg.ll;
    r = hr.ll;
  }
  return std::clamp(score, 0.0, 1.0);
}

inline double ms_ssim(Plane a, Plane b) {
  static constexpr std::array<double, 5> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  const std::size_t m = std::min(a.size(), a[0].size());
  std::size_t scales = 1;
  while (scales < 5 && (m >> scales) >= 8) ++scales;
  double norm = 0.0;
  for (std::size_t s = 0; s < scales; ++s) norm += weights[s];
  double out = 1.0;
  for (std::size_t s = 0; s < scales; ++s) {
    const Ssim v = window_ssim(a, b, 1.0, 7);
    out *= std::pow(std::max(s + 1 == scales ? v.ssim : v.cs, 0.0), weights[s] / norm);
    auto pool = [](const Plane& p) {
      const std::size_t h = p.size() / 2, w = p[0].size() / 2;
      Plane q = zeros(h, w);
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
          q[i][j] = (p[2 * i][2 * j] + p[2 * i][2 * j + 1] + p[2 * i + 1][2 * j] + p[2 * i + 1][2 * j + 1]) / 4.0;
      return q;
    };
    a = pool(a);
    b = pool(b);
  }
  return out;
}

/// GLCM contrast by direct pair enumeration: the mean of (q1 - q2)^2 over
/// each offset's pairs, averaged over offsets.
inline double glcm_contrast(const std::vector<std::vector<int>>& q, const std::vector<std::pair<int, int>>& offsets) {
  const int h = static_cast<int>(q.size()), w = static_cast<int>(q[0].size());
  double total = 0.0;
  int used = 0;
  for (const auto& [dr, dc] : offsets) {
    double s = 0.0, n = 0.0;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        if (i + dr < 0 || i + dr >= h || j + dc < 0 || j + dc >= w) continue;
        s += std::pow(q[i][j] - q[i + dr][j + dc], 2);
        n += 1;
      }
    if (n > 0) total += s / n, ++used;
  }
  return total / used;
}

/// Closed-form 32x32 pairs shared with tests/oracles/metrics_reference.py.
struct Pair {
  Plane gen, real;
};

inline Pair reference_pair(int kind) {
  constexpr std::size_t n = 32;
  Pair p{zeros(n, n), zeros(n, n)};
  for (std::size_t ii = 0; ii < n; ++ii) {
    for (std::size_t jj = 0; jj < n; ++jj) {
      const double i = static_cast<double>(ii), j = static_cast<double>(jj);
      const double parity = static_cast<double>((ii + jj) % 2);
      double g = 0.0, r = 0.0;
      if (kind == 0) {
        r = 0.5 + 0.4 * std::sin(0.37 * i + 0.11 * j * j / n);
        g = r + 0.05 * std::cos(1.3 * i - 0.7 * j);
      } else if (kind == 1) {
        const double smooth = 0.5 + 0.25 * std::cos(0.2 * i) * std::cos(0.3 * j);
        r = smooth + 0.1 * parity;
        g = smooth + 0.08 * parity + 0.02 * std::sin(0.9 * i * j / n);
      } else {
        r = 0.45 + 0.3 * std::sin(0.5 * i) * std::sin(0.45 * j) + 0.1 * std::cos(2.1 * i + 1.7 * j);
        g = std::pow(r, 1.1);
      }
      p.gen[ii][jj] = g;
      p.real[ii][jj] = r;
    }
  }
  return p;
}

// Values printed by tests/oracles/metrics_reference.py for the pairs above.
inline constexpr std::array<double, 3> kReferenceWqs = {0.8592943331847, 0.8190084377827727, 0.9949763637444735};
inline constexpr std::array<double, 3> kReferenceMsSsim = {0.996112286232797, 0.9938065979549268,
                                                           0.9985617640591845};

}  // namespace wavemask::oracle
