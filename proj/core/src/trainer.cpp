#include "wavemask/trainer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "wavemask/error.hpp"
#include "wavemask/saliency.hpp"

namespace wavemask {
namespace {

// Separate stream for the probe set so it never perturbs training draws.
constexpr std::uint64_t kProbeStream = 0x5DEECE66DULL;

void check_dataset(const std::vector<Tensor>& dataset, const char* what) {
  if (dataset.empty()) throw InvalidArgument(std::string(what) + ": dataset is empty");
  for (std::size_t i = 1; i < dataset.size(); ++i) {
    if (dataset[i].shape() != dataset[0].shape()) {
      throw InvalidArgument(std::string(what) + ": sample " + std::to_string(i) + " has shape " +
                            shape_to_string(dataset[i].shape()) + ", expected " +
                            shape_to_string(dataset[0].shape()));
    }
  }
}

double reduction_scale(const TrainConfig& cfg, std::size_t elements) {
  return cfg.reduction == Reduction::kMean ? 1.0 / static_cast<double>(elements) : 1.0;
}

void sgd_update(ParamRefs params, ParamRefs grads, double lr) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k].second;
    const Tensor& g = *grads[k].second;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
  }
}

struct FlowDraw {
  std::size_t index;
  Tensor eps;
  double tau;
};

FlowDraw draw_flow(Rng& rng, const std::vector<Tensor>& dataset) {
  const std::size_t index = rng.below(dataset.size());
  Tensor eps = gaussian_sample(rng, dataset[index].shape());
  const double tau = rng.uniform();
  return {index, std::move(eps), tau};
}

struct FlowEval {
  FlowSample sample;
  BinaryMask mask;
  double fm_sum = 0.0;
  std::size_t active = 0;
};

FlowEval evaluate_flow(const TrainConfig& cfg, const VelocityNet& net, const Tensor& z0, const FlowDraw& draw,
                       Tensor* v_out) {
  FlowEval ev{make_flow_sample(z0, draw.eps, draw.tau), {}, 0.0, 0};
  Tensor v = velocity_forward(net, ev.sample.zt, draw.tau);
  const auto [c, h, w] = as_chw(z0, "train_flow");
  (void)c;
  if (cfg.masking) {
    const Tensor& source = cfg.saliency_source == SaliencySource::kCleanLatent ? ev.sample.z0 : ev.sample.zt;
    const SaliencyMap a = saliency_from_latent(source);
    ev.mask = mask_at(a, cfg.schedule, discrete_timestep(draw.tau, cfg.schedule.T));
    const LossBreakdown l = masked_fm_loss(ev.sample, v, ev.mask);
    ev.fm_sum = l.total;
    ev.active = l.active_element_count;
  } else {
    ev.mask = {Tensor({h, w}, 1.0), discrete_timestep(draw.tau, cfg.schedule.T)};
    const LossBreakdown l = fm_loss(ev.sample, v);
    ev.fm_sum = l.total;
    ev.active = l.active_element_count;
  }
  if (v_out) *v_out = std::move(v);
  return ev;
}

std::map<std::string, double> flow_probe(const TrainConfig& cfg, const VelocityNet& net,
                                         const std::vector<Tensor>& dataset) {
  Rng rng(cfg.seed ^ kProbeStream);
  const double scale = reduction_scale(cfg, dataset[0].size());
  double total = 0.0, fm = 0.0;
  for (std::size_t k = 0; k < cfg.probe_size; ++k) {
    const FlowDraw draw = draw_flow(rng, dataset);
    const FlowEval ev = evaluate_flow(cfg, net, dataset[draw.index], draw, nullptr);
    total += scale * ev.fm_sum;
    fm += ev.fm_sum;
  }
  const double n = static_cast<double>(cfg.probe_size);
  return {{"total", total / n}, {"fm_sum", fm / n}};
}

std::map<std::string, double> vae_probe(const TrainConfig& cfg, const TinyVae& vae,
                                        const std::vector<Tensor>& dataset) {
  Rng rng(cfg.seed ^ kProbeStream);
  const double scale = reduction_scale(cfg, dataset[0].size());
  std::map<std::string, double> acc;
  for (std::size_t k = 0; k < cfg.probe_size; ++k) {
    const std::size_t index = rng.below(dataset.size());
    const VaeForward fwd = vae_forward(vae, dataset[index], rng);
    const LossBreakdown l = vae_objective(fwd, dataset[index], cfg.vae_weights, cfg.vae_terms);
    acc["total"] += scale * l.total;
    for (const auto& [name, v] : l.components) acc[name] += v;
  }
  for (auto& [name, v] : acc) v /= static_cast<double>(cfg.probe_size);
  return acc;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 1) throw InvalidArgument("train config: steps must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("train config: learning rate must be > 0");
  if (batch_size < 1) throw InvalidArgument("train config: batch size must be >= 1");
  if (probe_size < 1) throw InvalidArgument("train config: probe size must be >= 1");
  schedule.validate();
  vae_weights.validate();
}

std::string train_log_to_csv(const TrainLog& log) {
  std::ostringstream os;
  os << "step,total";
  for (const auto& name : log.component_names) os << ',' << name;
  os << ",masked_fraction\n";
  for (const auto& rec : log.steps) {
    os << rec.step << ',' << format_double(rec.total);
    for (const auto& name : log.component_names) {
      const auto it = rec.components.find(name);
      os << ',' << format_double(it == rec.components.end() ? 0.0 : it->second);
    }
    os << ',' << format_double(rec.masked_fraction) << '\n';
  }
  return os.str();
}

// --- Synthetic data ----------------------------------------------------------

Tensor quadrant_indicator(std::size_t size, int quadrant) {
  Tensor out({size, size});
  const std::size_t half = size / 2;
  const std::size_t r0 = quadrant >= 2 ? half : 0;
  const std::size_t c0 = quadrant % 2 ? half : 0;
  for (std::size_t i = r0; i < r0 + half; ++i) {
    for (std::size_t j = c0; j < c0 + half; ++j) out.at(i, j) = 1.0;
  }
  return out;
}

SyntheticDataset make_synthetic_dataset(Rng& rng, std::size_t n, std::size_t size, const SyntheticOptions& opts) {
  if (n == 0) throw InvalidArgument("make_synthetic_dataset: n must be >= 1");
  if (size < 16 || size % 2) throw InvalidArgument("make_synthetic_dataset: size must be even and >= 16");
  if (opts.channels == 0) throw InvalidArgument("make_synthetic_dataset: channels must be >= 1");
  SyntheticDataset ds;
  ds.size = size;
  const double pi = std::numbers::pi;
  const double fs = static_cast<double>(size);
  for (std::size_t s = 0; s < n; ++s) {
    const int quadrant = static_cast<int>(rng.below(4));
    const Tensor region = quadrant_indicator(size, quadrant);
    Tensor x({opts.channels, size, size});
    for (std::size_t c = 0; c < opts.channels; ++c) {
      for (int mode = 0; mode < 2; ++mode) {
        const double ky = static_cast<double>(rng.below(3));
        const double kx = static_cast<double>(rng.below(3));
        double amp = rng.uniform(opts.smooth_amplitude_min, opts.smooth_amplitude_max);
        if (rng.uniform() < 0.5) amp = -amp;
        for (std::size_t i = 0; i < size; ++i) {
          const double cy = std::cos(pi * ky * (static_cast<double>(i) + 0.5) / fs);
          for (std::size_t j = 0; j < size; ++j) {
            x.at(c, i, j) += amp * cy * std::cos(pi * kx * (static_cast<double>(j) + 0.5) / fs);
          }
        }
      }
      for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
          if (region.at(i, j) != 0.0) x.at(c, i, j) += (i + j) % 2 ? -opts.texture_amplitude : opts.texture_amplitude;
        }
      }
    }
    ds.samples.push_back(std::move(x));
    ds.texture_quadrant.push_back(quadrant);
  }
  return ds;
}

// --- Flow training -----------------------------------------------------------

FlowResult train_flow(const TrainConfig& config, const std::vector<Tensor>& dataset) {
  config.validate();
  check_dataset(dataset, "train_flow");
  const auto [c, h, w] = as_chw(dataset[0], "train_flow");
  if (h % 2 || w % 2) throw InvalidArgument("train_flow: spatial dims must be even");

  Rng rng(config.seed);
  FlowResult result{VelocityNet::init(c, config.hidden, rng), {}};
  TrainLog& log = result.log;
  log.component_names = {"fm_sum", "fm_mean_active"};
  log.probe_initial = flow_probe(config, result.net, dataset);

  const double scale = reduction_scale(config, dataset[0].size());
  const double batch_scale = 1.0 / static_cast<double>(config.batch_size);
  for (std::size_t step = 0; step < config.steps; ++step) {
    VelocityGrads acc{Tensor(result.net.w1.shape()), Tensor(result.net.b1.shape()), Tensor(result.net.w2.shape()),
                      Tensor(result.net.b2.shape()), Tensor({1})};
    double fm_sum = 0.0, masked = 0.0;
    std::size_t active = 0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const FlowDraw draw = draw_flow(rng, dataset);
      Tensor v;
      const FlowEval ev = evaluate_flow(config, result.net, dataset[draw.index], draw, &v);
      fm_sum += ev.fm_sum;
      active += ev.active;
      masked += ev.mask.fraction();
      Tensor dv = masked_fm_loss_grad(ev.sample, v, ev.mask);
      dv *= scale * batch_scale;
      VelocityGrads g = velocity_backward(result.net, ev.sample.zt, draw.tau, std::nullopt, dv);
      auto dst = acc.parameters();
      auto src = g.parameters();
      for (std::size_t k = 0; k < dst.size(); ++k) *dst[k].second += *src[k].second;
    }
    sgd_update(result.net.parameters(), acc.parameters(), config.learning_rate);

    StepRecord rec;
    rec.step = step;
    rec.total = scale * fm_sum * batch_scale;
    rec.components["fm_sum"] = fm_sum * batch_scale;
    rec.components["fm_mean_active"] = active ? fm_sum / static_cast<double>(active) : 0.0;
    rec.masked_fraction = masked * batch_scale;
    log.steps.push_back(std::move(rec));
  }
  log.probe_final = flow_probe(config, result.net, dataset);
  return result;
}

// --- VAE training ------------------------------------------------------------

VaeResult train_vae(const TrainConfig& config, const std::vector<Tensor>& dataset) {
  config.validate();
  check_dataset(dataset, "train_vae");
  const auto [c, h, w] = as_chw(dataset[0], "train_vae");
  if (h % 2 || w % 2) throw InvalidArgument("train_vae: spatial dims must be even");

  Rng rng(config.seed);
  VaeResult result{TinyVae::init(c, config.latent_channels, rng), {}};
  TrainLog& log = result.log;
  if (config.vae_terms == VaeTerms::kFull) {
    log.component_names = {"recon", "scale_consistency", "kl", "perceptual"};
  } else {
    log.component_names = {"recon"};
  }
  log.probe_initial = vae_probe(config, result.vae, dataset);

  const double scale = reduction_scale(config, dataset[0].size());
  const double batch_scale = 1.0 / static_cast<double>(config.batch_size);
  for (std::size_t step = 0; step < config.steps; ++step) {
    VaeGrads acc{Tensor(result.vae.enc_w.shape()), Tensor(result.vae.enc_b.shape()), Tensor(result.vae.dec_w.shape()),
                 Tensor(result.vae.dec_b.shape())};
    StepRecord rec;
    rec.step = step;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const std::size_t index = rng.below(dataset.size());
      const Tensor& x = dataset[index];
      const VaeForward fwd = vae_forward(result.vae, x, rng);
      const LossBreakdown l = vae_objective(fwd, x, config.vae_weights, config.vae_terms);
      rec.total += scale * l.total * batch_scale;
      for (const auto& [name, v] : l.components) rec.components[name] += v * batch_scale;
      VaeGrads g = vae_backward(result.vae, x, fwd, config.vae_weights, config.vae_terms, scale * batch_scale);
      auto dst = acc.parameters();
      auto src = g.parameters();
      for (std::size_t k = 0; k < dst.size(); ++k) *dst[k].second += *src[k].second;
    }
    sgd_update(result.vae.parameters(), acc.parameters(), config.learning_rate);
    log.steps.push_back(std::move(rec));
  }
  log.probe_final = vae_probe(config, result.vae, dataset);
  return result;
}

double mean_abs_latent_mean(const TinyVae& vae, const std::vector<Tensor>& dataset) {
  check_dataset(dataset, "mean_abs_latent_mean");
  double s = 0.0;
  std::size_t n = 0;
  for (const Tensor& x : dataset) {
    const Tensor mu = vae_encode_mean(vae, x);
    for (double v : mu.data()) s += std::abs(v);
    n += mu.size();
  }
  return s / static_cast<double>(n);
}

// --- Region report -----------------------------------------------------------

RegionReport region_report(const VelocityNet& net, const std::vector<Tensor>& dataset, const MaskSchedule& schedule,
                           std::uint64_t seed, double threshold) {
  check_dataset(dataset, "region_report");
  schedule.validate();
  Rng rng(seed);
  RegionReport r;
  double sal_hi = 0.0, sal_lo = 0.0, res_hi = 0.0, res_lo = 0.0, cov_hi = 0.0, cov_lo = 0.0;
  for (const Tensor& z0 : dataset) {
    const auto [c, h, w] = as_chw(z0, "region_report");
    const std::size_t plane = h * w;
    const SaliencyMap a = saliency_from_latent(z0);
    const Tensor eps = gaussian_sample(rng, z0.shape());
    const double tau = rng.uniform();
    const FlowSample s = make_flow_sample(z0, eps, tau);
    const Tensor v = velocity_forward(net, s.zt, tau);
    const Tensor counts = coverage_count(a.map, schedule);
    for (std::size_t p = 0; p < plane; ++p) {
      double res = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t k = ch * plane + p;
        const double d = (eps[k] - z0[k]) - v[k];
        res += d * d;
      }
      res /= static_cast<double>(c);
      const double cov = counts[p] / static_cast<double>(schedule.T);
      if (a.map[p] >= threshold) {
        ++r.hi_positions;
        sal_hi += a.map[p];
        res_hi += res;
        cov_hi += cov;
      } else {
        ++r.lo_positions;
        sal_lo += a.map[p];
        res_lo += res;
        cov_lo += cov;
      }
    }
  }
  if (r.hi_positions == 0 || r.lo_positions == 0) {
    throw UndefinedMetric("region_report: one saliency region is empty (hi " + std::to_string(r.hi_positions) +
                          ", lo " + std::to_string(r.lo_positions) + ")");
  }
  const double nh = static_cast<double>(r.hi_positions), nl = static_cast<double>(r.lo_positions);
  r.mean_saliency_hi = sal_hi / nh;
  r.mean_saliency_lo = sal_lo / nl;
  r.residual_hi = res_hi / nh;
  r.residual_lo = res_lo / nl;
  r.supervised_fraction_hi = cov_hi / nh;
  r.supervised_fraction_lo = cov_lo / nl;
  r.supervised_ratio = r.supervised_fraction_hi / r.supervised_fraction_lo;
  const double l = schedule.lower_bound;
  r.predicted_ratio = std::min(1.0, r.mean_saliency_hi + l) / std::min(1.0, r.mean_saliency_lo + l);
  return r;
}

std::string region_report_to_json(const RegionReport& r) {
  nlohmann::ordered_json j;
  j["hi_positions"] = r.hi_positions;
  j["lo_positions"] = r.lo_positions;
  j["mean_saliency_hi"] = r.mean_saliency_hi;
  j["mean_saliency_lo"] = r.mean_saliency_lo;
  j["residual_hi"] = r.residual_hi;
  j["residual_lo"] = r.residual_lo;
  j["supervised_fraction_hi"] = r.supervised_fraction_hi;
  j["supervised_fraction_lo"] = r.supervised_fraction_lo;
  j["supervised_ratio"] = r.supervised_ratio;
  j["predicted_ratio"] = r.predicted_ratio;
  return j.dump(2) + "\n";
}

}  // namespace wavemask
