#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wavemask/masking.hpp"
#include "wavemask/models.hpp"
#include "wavemask/objectives.hpp"
#include "wavemask/rng.hpp"

namespace wavemask {

enum class SaliencySource { kCleanLatent, kNoisyLatent };
enum class Reduction { kSum, kMean };

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t steps = 2000;
  double learning_rate = 1e-2;
  std::size_t batch_size = 1;
  MaskSchedule schedule{};
  bool masking = true;
  SaliencySource saliency_source = SaliencySource::kCleanLatent;
  // kMean divides every loss by the element count of one sample, so the
  // relative weighting of terms is the same as under kSum.
  Reduction reduction = Reduction::kMean;
  std::size_t hidden = 16;
  std::size_t latent_channels = 4;
  VaeLossWeights vae_weights{};
  VaeTerms vae_terms = VaeTerms::kFull;
  // Fixed held-out draws used to measure loss before and after training.
  std::size_t probe_size = 32;

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  double total = 0.0;
  std::map<std::string, double> components;
  double masked_fraction = 1.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TrainLog {
  std::vector<std::string> component_names;
  std::vector<StepRecord> steps;
  // Probe-set losses before the first and after the last update. Keys are
  // "total" plus the component names.
  std::map<std::string, double> probe_initial;
  std::map<std::string, double> probe_final;

  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

/// CSV with header "step,total,<components...>,masked_fraction" and
/// round-trip precision numbers.
std::string train_log_to_csv(const TrainLog& log);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Quadrant index: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
struct SyntheticDataset {
  std::vector<Tensor> samples;
  std::vector<int> texture_quadrant;
  std::size_t size = 0;
};

struct SyntheticOptions {
  std::size_t channels = 1;
  double smooth_amplitude_min = 0.5;
  double smooth_amplitude_max = 1.0;
  double texture_amplitude = 0.5;
};

/// Each sample: two random low-order cosine modes plus a +-a pixel
/// checkerboard filling one random quadrant. size must be even and >= 16.
SyntheticDataset make_synthetic_dataset(Rng& rng, std::size_t n, std::size_t size, const SyntheticOptions& opts = {});

/// H x W indicator (1 inside) of a quadrant of a size x size grid.
Tensor quadrant_indicator(std::size_t size, int quadrant);

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

struct FlowResult {
  VelocityNet net;
  TrainLog log;
};

struct VaeResult {
  TinyVae vae;
  TrainLog log;
};

/// Plain SGD on the (masked) flow-matching objective. Each step draws a
/// sample index, eps ~ N(0, I) and tau ~ U[0, 1), builds the saliency map
/// from the configured source, masks at t = ceil(tau T) and updates.
FlowResult train_flow(const TrainConfig& config, const std::vector<Tensor>& dataset);

/// Plain SGD on the four-term VAE objective.
VaeResult train_vae(const TrainConfig& config, const std::vector<Tensor>& dataset);

/// Mean |mu| of the encoder over a dataset.
double mean_abs_latent_mean(const TinyVae& vae, const std::vector<Tensor>& dataset);

// ---------------------------------------------------------------------------
// Region report
// ---------------------------------------------------------------------------

/// Splits every sample's positions by saliency (A >= threshold is "high")
/// and reports velocity residuals and supervised-step allocation per region.
struct RegionReport {
  std::size_t hi_positions = 0;
  std::size_t lo_positions = 0;
  double mean_saliency_hi = 0.0;
  double mean_saliency_lo = 0.0;
  // Mean over positions of the channel-averaged squared velocity residual.
  double residual_hi = 0.0;
  double residual_lo = 0.0;
  // Empirical fraction of t in [1, T] with mask 1, averaged per region.
  double supervised_fraction_hi = 0.0;
  double supervised_fraction_lo = 0.0;
  double supervised_ratio = 0.0;
  // min(1, mean_saliency_hi + l) / min(1, mean_saliency_lo + l).
  double predicted_ratio = 0.0;
};

RegionReport region_report(const VelocityNet& net, const std::vector<Tensor>& dataset, const MaskSchedule& schedule,
                           std::uint64_t seed = 0, double threshold = 0.5);

std::string region_report_to_json(const RegionReport& report);

}  // namespace wavemask
