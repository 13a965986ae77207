#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wavemask/tensor.hpp"

namespace wavemask {

// Frequency-aware image metrics. Images are C x H x W (or H x W) tensors,
// nominally in [0, 1]; multi-channel energies are summed over channels.

/// (E_LH + E_HL + E_HH) / E_LL of a single-level Haar transform.
/// Throws UndefinedMetric when E_LL is zero.
double hlfr(const Tensor& img);

/// |hlfr(gen) - hlfr(real)|.
double rdr(const Tensor& gen, const Tensor& real);

/// Sum over levels 1..L of the detail-band energies.
double hfe(const Tensor& img, std::size_t depth);

/// hfe(gen)/total(gen) - hfe(real)/total(real), totals over every pyramid
/// coefficient. Throws UndefinedMetric for zero-energy input.
double hfei(const Tensor& gen, const Tensor& real, std::size_t depth);

struct WqsConfig {
  std::size_t depth = 3;
  /// Empty means uniform 1/(4L). Otherwise 4L weights ordered level-major,
  /// {ll, lh, hl, hh} within a level, summing to 1.
  std::vector<double> weights;
  double lambda_q = 0.1;
  std::size_t window = 7;

  std::vector<double> resolved_weights() const;
  void validate() const;
};

/// Mean local SSIM over all valid (unpadded) square windows of side
/// min(window, h, w), per channel, averaged. Uniform window, population
/// variances, C1 = (0.01 R)^2, C2 = (0.03 R)^2.
double mean_ssim(const Tensor& a, const Tensor& b, double dynamic_range, std::size_t window);

/// Per-subband result used by wqs; exposed for diagnostics.
struct SubbandScore {
  std::size_t level;
  std::string band;
  double weight;
  double ssim;
  double mse;  // on subbands divided by the reference's dynamic range
};

std::vector<SubbandScore> wqs_subbands(const Tensor& gen, const Tensor& real, const WqsConfig& cfg);

/// sum w (SSIM - lambda_q MSE), clamped to [0, 1]. Each level contributes its
/// own LL approximation plus the three detail bands. SSIM constants use the
/// reference subband's dynamic range R (treated as 1 when R is 0), and the
/// MSE is taken on subbands divided by R.
double wqs(const Tensor& gen, const Tensor& real, const WqsConfig& cfg = {});

/// Canonical per-scale exponents of multi-scale SSIM.
inline constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

/// Number of scales used for an image whose smaller side is `min_dim`:
/// largest k with min_dim / 2^(k-1) >= 8, capped at 5.
std::size_t ms_ssim_scales(std::size_t min_dim);

/// Multi-scale SSIM with 7x7 uniform windows, dynamic range 1 and the
/// canonical exponents renormalized over the active scales. Downsampling is
/// avgpool2x (an odd trailing row/column is dropped first). Negative
/// contrast-structure terms are clamped to 0. Channels are scored
/// independently and averaged.
double ms_ssim(const Tensor& gen, const Tensor& real);

struct GlcmStats {
  double contrast = 0.0;
  double energy = 0.0;
  double homogeneity = 0.0;
};

using GlcmOffset = std::pair<int, int>;  // (row, col)
inline const std::vector<GlcmOffset> kDefaultGlcmOffsets = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};

/// Gray-level quantization used by the GLCM: floor(v * levels) clamped to
/// [0, levels - 1]. Multi-channel images are averaged to gray first.
std::vector<int> glcm_quantize(const Tensor& img, int levels);

/// Symmetric, normalized co-occurrence matrix (levels x levels, row-major)
/// averaged over the offsets that fit in the image.
std::vector<double> glcm_matrix(const Tensor& img, int levels = 64,
                                const std::vector<GlcmOffset>& offsets = kDefaultGlcmOffsets);

GlcmStats glcm_stats(const Tensor& img, int levels = 64, const std::vector<GlcmOffset>& offsets = kDefaultGlcmOffsets);

struct MetricReport {
  double hlfr_real = 0.0;
  double hlfr_gen = 0.0;
  double rdr = 0.0;
  double wqs = 0.0;
  double hfe_real = 0.0;
  double hfe_gen = 0.0;
  double hfei = 0.0;
  double ms_ssim = 0.0;
  double glcm_contrast = 0.0;
  double glcm_energy = 0.0;
  double glcm_homogeneity = 0.0;
};

/// All metrics for one generated/reference pair. GLCM statistics describe
/// the generated image.
MetricReport evaluate_pair(const Tensor& gen, const Tensor& real, const WqsConfig& cfg = {});

/// Pairs files by sorted name (.pgm, .ppm, .lwt) and averages the per-pair
/// reports. Throws InvalidArgument listing unmatched names.
MetricReport evaluate_dirs(const std::filesystem::path& gen_dir, const std::filesystem::path& real_dir,
                           const WqsConfig& cfg = {});

/// JSON object whose keys are the MetricReport field names.
std::string metric_report_to_json(const MetricReport& report);

}  // namespace wavemask
