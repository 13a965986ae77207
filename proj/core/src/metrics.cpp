#include "wavemask/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "wavemask/error.hpp"
#include "wavemask/io.hpp"
#include "wavemask/resample.hpp"
#include "wavemask/wavelet.hpp"

namespace wavemask {
namespace {

constexpr std::size_t kMsSsimWindow = 7;
constexpr std::size_t kMsSsimMinSide = 8;

// Local SSIM components averaged over every valid window of one plane.
struct SsimMeans {
  double ssim = 0.0;
  double cs = 0.0;
};

SsimMeans plane_ssim(const double* a, const double* b, std::size_t h, std::size_t w, std::size_t win, double c1,
                     double c2) {
  const double n = static_cast<double>(win * win);
  SsimMeans acc;
  std::size_t windows = 0;
  for (std::size_t i = 0; i + win <= h; ++i) {
    for (std::size_t j = 0; j + win <= w; ++j) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t y = i; y < i + win; ++y) {
        for (std::size_t x = j; x < j + win; ++x) {
          sa += a[y * w + x];
          sb += b[y * w + x];
        }
      }
      const double ma = sa / n, mb = sb / n;
      double vaa = 0.0, vbb = 0.0, vab = 0.0;
      for (std::size_t y = i; y < i + win; ++y) {
        for (std::size_t x = j; x < j + win; ++x) {
          const double da = a[y * w + x] - ma, db = b[y * w + x] - mb;
          vaa += da * da;
          vbb += db * db;
          vab += da * db;
        }
      }
      vaa /= n;
      vbb /= n;
      vab /= n;
      const double l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      const double cs = (2.0 * vab + c2) / (vaa + vbb + c2);
      acc.ssim += l * cs;
      acc.cs += cs;
      ++windows;
    }
  }
  acc.ssim /= static_cast<double>(windows);
  acc.cs /= static_cast<double>(windows);
  return acc;
}

SsimMeans tensor_ssim(const Tensor& a, const Tensor& b, double range, std::size_t window) {
  require_same_shape(a, b, "ssim");
  const auto [c, h, w] = as_chw(a, "ssim");
  const std::size_t win = std::min({window, h, w});
  if (win == 0) throw InvalidArgument("ssim: window must be >= 1");
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  SsimMeans total;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const SsimMeans m = plane_ssim(a.data().data() + ch * h * w, b.data().data() + ch * h * w, h, w, win, c1, c2);
    total.ssim += m.ssim;
    total.cs += m.cs;
  }
  total.ssim /= static_cast<double>(c);
  total.cs /= static_cast<double>(c);
  return total;
}

Tensor crop_even(const Tensor& t) {
  const auto [c, h, w] = as_chw(t, "crop_even");
  const std::size_t eh = h - h % 2, ew = w - w % 2;
  if (eh == h && ew == w) return t;
  Tensor out({c, eh, ew});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < eh; ++i) {
      for (std::size_t j = 0; j < ew; ++j) out.at(ch, i, j) = t[(ch * h + i) * w + j];
    }
  }
  return out;
}

Tensor channel(const Tensor& t, std::size_t ch) {
  const auto [c, h, w] = as_chw(t, "channel");
  (void)c;
  std::vector<double> data(t.values().begin() + ch * h * w, t.values().begin() + (ch + 1) * h * w);
  return Tensor({1, h, w}, std::move(data));
}

double ms_ssim_single(Tensor a, Tensor b) {
  const auto [c, h, w] = as_chw(a, "ms_ssim");
  (void)c;
  const std::size_t scales = ms_ssim_scales(std::min(h, w));
  double wsum = 0.0;
  for (std::size_t s = 0; s < scales; ++s) wsum += kMsSsimWeights[s];
  double result = 1.0;
  for (std::size_t s = 0; s < scales; ++s) {
    const SsimMeans m = tensor_ssim(a, b, 1.0, kMsSsimWindow);
    const double term = s + 1 == scales ? m.ssim : m.cs;
    result *= std::pow(std::max(term, 0.0), kMsSsimWeights[s] / wsum);
    if (s + 1 < scales) {
      a = avgpool2x(crop_even(a));
      b = avgpool2x(crop_even(b));
    }
  }
  return result;
}

double detail_energy(const DetailBands& d) { return d.lh.sum_squares() + d.hl.sum_squares() + d.hh.sum_squares(); }

bool is_image_file(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pgm" || ext == ".ppm" || ext == ".lwt";
}

std::vector<std::string> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw FormatError(dir.string(), -1, "not a directory");
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

double hlfr(const Tensor& img) {
  const SubbandSet b = dwt2(img);
  const double low = b.ll.sum_squares();
  if (low == 0.0) throw UndefinedMetric("hlfr: low-frequency (LL) energy is zero");
  return (b.lh.sum_squares() + b.hl.sum_squares() + b.hh.sum_squares()) / low;
}

double rdr(const Tensor& gen, const Tensor& real) { return std::abs(hlfr(gen) - hlfr(real)); }

double hfe(const Tensor& img, std::size_t depth) {
  const WaveletPyramid pyr = dwt2_multi(img, depth);
  double e = 0.0;
  for (const auto& lvl : pyr.levels) e += detail_energy(lvl);
  return e;
}

double hfei(const Tensor& gen, const Tensor& real, std::size_t depth) {
  require_same_shape(gen, real, "hfei");
  auto ratio = [depth](const Tensor& img, const char* which) {
    const WaveletPyramid pyr = dwt2_multi(img, depth);
    const double total = pyr.energy();
    if (total == 0.0) throw UndefinedMetric(std::string("hfei: ") + which + " image has zero energy");
    double high = 0.0;
    for (const auto& lvl : pyr.levels) high += detail_energy(lvl);
    return high / total;
  };
  return ratio(gen, "generated") - ratio(real, "reference");
}

std::vector<double> WqsConfig::resolved_weights() const {
  if (!weights.empty()) return weights;
  return std::vector<double>(4 * depth, 1.0 / static_cast<double>(4 * depth));
}

void WqsConfig::validate() const {
  if (depth == 0) throw InvalidArgument("wqs: depth must be >= 1");
  if (!(lambda_q >= 0.0)) throw InvalidArgument("wqs: lambda_q must be >= 0");
  if (window == 0) throw InvalidArgument("wqs: window must be >= 1");
  if (!weights.empty()) {
    if (weights.size() != 4 * depth) {
      throw InvalidArgument("wqs: expected " + std::to_string(4 * depth) + " weights, got " +
                            std::to_string(weights.size()));
    }
    double s = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw InvalidArgument("wqs: weights must be non-negative");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument("wqs: weights must sum to 1");
  }
}

double mean_ssim(const Tensor& a, const Tensor& b, double dynamic_range, std::size_t window) {
  return tensor_ssim(a, b, dynamic_range, window).ssim;
}

std::vector<SubbandScore> wqs_subbands(const Tensor& gen, const Tensor& real, const WqsConfig& cfg) {
  cfg.validate();
  require_same_shape(gen, real, "wqs");
  const std::vector<double> weights = cfg.resolved_weights();
  const std::size_t legal = max_dwt_depth(real);
  if (cfg.depth > legal) {
    throw InvalidArgument("wqs: shape " + shape_to_string(real.shape()) + " does not support depth " +
                          std::to_string(cfg.depth) + "; maximum legal depth is " + std::to_string(legal));
  }
  std::vector<SubbandScore> out;
  Tensor g = gen, r = real;
  for (std::size_t level = 1; level <= cfg.depth; ++level) {
    SubbandSet gb = dwt2(g);
    SubbandSet rb = dwt2(r);
    const std::pair<const char*, std::pair<const Tensor*, const Tensor*>> bands[] = {
        {"ll", {&gb.ll, &rb.ll}}, {"lh", {&gb.lh, &rb.lh}}, {"hl", {&gb.hl, &rb.hl}}, {"hh", {&gb.hh, &rb.hh}}};
    for (std::size_t s = 0; s < 4; ++s) {
      const Tensor& gs = *bands[s].second.first;
      const Tensor& rs = *bands[s].second.second;
      double range = rs.max() - rs.min();
      if (range == 0.0) range = 1.0;
      const double ssim = mean_ssim(gs, rs, range, cfg.window);
      double mse = 0.0;
      for (std::size_t k = 0; k < gs.size(); ++k) {
        const double d = (gs[k] - rs[k]) / range;
        mse += d * d;
      }
      mse /= static_cast<double>(gs.size());
      out.push_back({level, bands[s].first, weights[(level - 1) * 4 + s], ssim, mse});
    }
    g = std::move(gb.ll);
    r = std::move(rb.ll);
  }
  return out;
}

double wqs(const Tensor& gen, const Tensor& real, const WqsConfig& cfg) {
  double score = 0.0;
  for (const SubbandScore& s : wqs_subbands(gen, real, cfg)) score += s.weight * (s.ssim - cfg.lambda_q * s.mse);
  return std::clamp(score, 0.0, 1.0);
}

std::size_t ms_ssim_scales(std::size_t min_dim) {
  if (min_dim < kMsSsimMinSide) return 0;
  std::size_t k = 1;
  while (k < kMsSsimWeights.size() && (min_dim >> k) >= kMsSsimMinSide) ++k;
  return k;
}

double ms_ssim(const Tensor& gen, const Tensor& real) {
  require_same_shape(gen, real, "ms_ssim");
  const auto [c, h, w] = as_chw(gen, "ms_ssim");
  if (std::min(h, w) < kMsSsimMinSide) {
    throw InvalidArgument("ms_ssim: image too small (" + shape_to_string(gen.shape()) + "), need both sides >= 8");
  }
  double total = 0.0;
  for (std::size_t ch = 0; ch < c; ++ch) total += ms_ssim_single(channel(gen, ch), channel(real, ch));
  return total / static_cast<double>(c);
}

std::vector<int> glcm_quantize(const Tensor& img, int levels) {
  if (levels < 2) throw InvalidArgument("glcm: levels must be >= 2");
  const auto [c, h, w] = as_chw(img, "glcm");
  const std::size_t plane = h * w;
  std::vector<int> q(plane);
  for (std::size_t p = 0; p < plane; ++p) {
    double g = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) g += img[ch * plane + p];
    g /= static_cast<double>(c);
    const double bin = std::floor(std::clamp(g, 0.0, 1.0) * levels);
    q[p] = std::clamp(static_cast<int>(bin), 0, levels - 1);
  }
  return q;
}

std::vector<double> glcm_matrix(const Tensor& img, int levels, const std::vector<GlcmOffset>& offsets) {
  const auto [c, h, w] = as_chw(img, "glcm");
  (void)c;
  const std::vector<int> q = glcm_quantize(img, levels);
  const auto L = static_cast<std::size_t>(levels);
  std::vector<double> avg(L * L, 0.0);
  std::size_t used = 0;
  const auto hh = static_cast<long>(h), ww = static_cast<long>(w);
  for (const auto& [dr, dc] : offsets) {
    std::vector<double> counts(L * L, 0.0);
    double pairs = 0.0;
    for (long i = 0; i < hh; ++i) {
      for (long j = 0; j < ww; ++j) {
        const long i2 = i + dr, j2 = j + dc;
        if (i2 < 0 || i2 >= hh || j2 < 0 || j2 >= ww) continue;
        const auto a = static_cast<std::size_t>(q[i * ww + j]);
        const auto b = static_cast<std::size_t>(q[i2 * ww + j2]);
        counts[a * L + b] += 1.0;
        counts[b * L + a] += 1.0;
        pairs += 2.0;
      }
    }
    if (pairs == 0.0) continue;
    for (std::size_t k = 0; k < L * L; ++k) avg[k] += counts[k] / pairs;
    ++used;
  }
  if (used == 0) {
    throw InvalidArgument("glcm: image " + shape_to_string(img.shape()) + " has no pixel pairs for the given offsets");
  }
  for (double& v : avg) v /= static_cast<double>(used);
  return avg;
}

GlcmStats glcm_stats(const Tensor& img, int levels, const std::vector<GlcmOffset>& offsets) {
  const std::vector<double> p = glcm_matrix(img, levels, offsets);
  GlcmStats s;
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) {
      const double v = p[static_cast<std::size_t>(i * levels + j)];
      const double d = static_cast<double>(i - j);
      s.contrast += v * d * d;
      s.energy += v * v;
      s.homogeneity += v / (1.0 + std::abs(d));
    }
  }
  return s;
}

MetricReport evaluate_pair(const Tensor& gen, const Tensor& real, const WqsConfig& cfg) {
  require_same_shape(gen, real, "evaluate_pair");
  MetricReport r;
  r.hlfr_real = hlfr(real);
  r.hlfr_gen = hlfr(gen);
  r.rdr = std::abs(r.hlfr_gen - r.hlfr_real);
  r.wqs = wqs(gen, real, cfg);
  r.hfe_real = hfe(real, cfg.depth);
  r.hfe_gen = hfe(gen, cfg.depth);
  r.hfei = hfei(gen, real, cfg.depth);
  r.ms_ssim = ms_ssim(gen, real);
  const GlcmStats g = glcm_stats(gen);
  r.glcm_contrast = g.contrast;
  r.glcm_energy = g.energy;
  r.glcm_homogeneity = g.homogeneity;
  return r;
}

MetricReport evaluate_dirs(const std::filesystem::path& gen_dir, const std::filesystem::path& real_dir,
                           const WqsConfig& cfg) {
  const std::vector<std::string> gen = list_images(gen_dir);
  const std::vector<std::string> real = list_images(real_dir);
  if (gen != real) {
    std::vector<std::string> only_gen, only_real;
    std::set_difference(gen.begin(), gen.end(), real.begin(), real.end(), std::back_inserter(only_gen));
    std::set_difference(real.begin(), real.end(), gen.begin(), gen.end(), std::back_inserter(only_real));
    std::string msg = "evaluate_dirs: directories do not pair up (" + std::to_string(gen.size()) + " vs " +
                      std::to_string(real.size()) + " files)";
    for (const auto& n : only_gen) msg += "; only in " + gen_dir.string() + ": " + n;
    for (const auto& n : only_real) msg += "; only in " + real_dir.string() + ": " + n;
    throw InvalidArgument(msg);
  }
  if (gen.empty()) throw InvalidArgument("evaluate_dirs: no image files found in " + gen_dir.string());

  MetricReport sum;
  for (const auto& name : gen) {
    const MetricReport r = evaluate_pair(io::read_any(gen_dir / name), io::read_any(real_dir / name), cfg);
    sum.hlfr_real += r.hlfr_real;
    sum.hlfr_gen += r.hlfr_gen;
    sum.rdr += r.rdr;
    sum.wqs += r.wqs;
    sum.hfe_real += r.hfe_real;
    sum.hfe_gen += r.hfe_gen;
    sum.hfei += r.hfei;
    sum.ms_ssim += r.ms_ssim;
    sum.glcm_contrast += r.glcm_contrast;
    sum.glcm_energy += r.glcm_energy;
    sum.glcm_homogeneity += r.glcm_homogeneity;
  }
  const double n = static_cast<double>(gen.size());
  for (double* f : {&sum.hlfr_real, &sum.hlfr_gen, &sum.rdr, &sum.wqs, &sum.hfe_real, &sum.hfe_gen, &sum.hfei,
                    &sum.ms_ssim, &sum.glcm_contrast, &sum.glcm_energy, &sum.glcm_homogeneity}) {
    *f /= n;
  }
  return sum;
}

std::string metric_report_to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["hlfr_real"] = r.hlfr_real;
  j["hlfr_gen"] = r.hlfr_gen;
  j["rdr"] = r.rdr;
  j["wqs"] = r.wqs;
  j["hfe_real"] = r.hfe_real;
  j["hfe_gen"] = r.hfe_gen;
  j["hfei"] = r.hfei;
  j["ms_ssim"] = r.ms_ssim;
  j["glcm_contrast"] = r.glcm_contrast;
  j["glcm_energy"] = r.glcm_energy;
  j["glcm_homogeneity"] = r.glcm_homogeneity;
  return j.dump(2) + "\n";
}

}  // namespace wavemask
