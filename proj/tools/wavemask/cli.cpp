#include "wavemask/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavemask/error.hpp"
#include "wavemask/io.hpp"
#include "wavemask/masking.hpp"
#include "wavemask/metrics.hpp"
#include "wavemask/models.hpp"
#include "wavemask/saliency.hpp"
#include "wavemask/trainer.hpp"
#include "wavemask/wavelet.hpp"

namespace wavemask::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kFormats =
    "File formats:\n"
    "  LWT1  tensor file: 'LWT1', u32 rank, rank x u32 dims, float32 payload (all little-endian)\n"
    "  PGM   binary P5, 8-bit; PPM binary P6, 8-bit. Pixels map to [0,1] as v/255.\n"
    "Exit codes: 0 ok, 2 usage error, 3 file/format error, 4 numeric/domain error.\n";

void write_text(const fs::path& path, const std::string& text) {
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = io::read_file(path);
  return {bytes.begin(), bytes.end()};
}

std::string band_file(std::size_t level, const char* band) {
  return "l" + std::to_string(level) + "_" + band + ".lwt";
}

// --- dwt / idwt ----------------------------------------------------------------

struct DwtArgs {
  std::string in;
  std::size_t depth = 1;
  std::string out_dir = ".";
};

void cmd_dwt(const DwtArgs& a) {
  const Tensor x = io::read_any(a.in);
  const WaveletPyramid pyr = dwt2_multi(x, a.depth);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  io::write_lwt(dir / "ll.lwt", pyr.top_ll);
  for (std::size_t l = 0; l < pyr.depth(); ++l) {
    io::write_lwt(dir / band_file(l + 1, "lh"), pyr.levels[l].lh);
    io::write_lwt(dir / band_file(l + 1, "hl"), pyr.levels[l].hl);
    io::write_lwt(dir / band_file(l + 1, "hh"), pyr.levels[l].hh);
  }
}

struct IdwtArgs {
  std::string in_dir;
  std::size_t depth = 1;
  std::string out;
  std::string pgm;
};

void cmd_idwt(const IdwtArgs& a) {
  const fs::path dir(a.in_dir);
  WaveletPyramid pyr;
  pyr.top_ll = io::read_lwt(dir / "ll.lwt");
  for (std::size_t l = 1; l <= a.depth; ++l) {
    pyr.levels.push_back({io::read_lwt(dir / band_file(l, "lh")), io::read_lwt(dir / band_file(l, "hl")),
                          io::read_lwt(dir / band_file(l, "hh"))});
  }
  const Tensor x = idwt2_multi(pyr);
  io::write_lwt(a.out, x);
  if (!a.pgm.empty()) io::write_pnm(a.pgm, x);
}

// --- saliency / mask -----------------------------------------------------------

struct SaliencyArgs {
  std::string in;
  std::string out;
  std::string png;
  double epsilon = kSaliencyEpsilon;
};

void cmd_saliency(const SaliencyArgs& a) {
  const SaliencyMap s = saliency_from_latent(io::read_any(a.in), a.epsilon);
  io::write_lwt(a.out, s.map);
  if (!a.png.empty()) io::write_pnm(a.png, s.map);
}

struct MaskArgs {
  std::string saliency;
  std::int64_t T = 1000;
  double l = 0.3;
  std::optional<std::int64_t> t;
  std::optional<double> tau;
  std::string out;
  std::string png;
};

void cmd_mask(const MaskArgs& a) {
  Tensor sal = io::read_lwt(a.saliency);
  if (sal.rank() == 3 && sal.dim(0) == 1) sal = sal.reshaped({sal.dim(1), sal.dim(2)});
  if (sal.rank() != 2) throw InvalidArgument("mask: saliency map must be H x W, got " + shape_to_string(sal.shape()));
  const MaskSchedule sched{a.T, a.l};
  sched.validate();
  const std::int64_t t = a.t ? *a.t : discrete_timestep(*a.tau, a.T);
  const BinaryMask m = mask_at(sal, sched, t);
  io::write_lwt(a.out, m.mask);
  if (!a.png.empty()) io::write_pnm(a.png, m.mask);
}

// --- train-demo / region-report -----------------------------------------------

struct TrainArgs {
  std::string mode = "flow";
  std::uint64_t seed = 0;
  std::size_t steps = 2000;
  double l = 0.3;
  std::int64_t T = 1000;
  bool no_mask = false;
  std::string out_dir;
  std::size_t samples = 16;
  std::size_t size = 32;
  double lr = 1e-2;
  std::size_t batch = 1;
  std::string saliency_source = "z0";
  std::string reduction = "mean";
  std::size_t hidden = 16;
  std::size_t latent_channels = 4;
  double alpha = 0.25;
  double beta = 0.001;
  double lambda_p = 0.05;
};

TrainConfig to_config(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.seed = a.seed;
  cfg.steps = a.steps;
  cfg.learning_rate = a.lr;
  cfg.batch_size = a.batch;
  cfg.schedule = {a.T, a.l};
  cfg.masking = !a.no_mask;
  cfg.saliency_source = a.saliency_source == "zt" ? SaliencySource::kNoisyLatent : SaliencySource::kCleanLatent;
  cfg.reduction = a.reduction == "sum" ? Reduction::kSum : Reduction::kMean;
  cfg.hidden = a.hidden;
  cfg.latent_channels = a.latent_channels;
  cfg.vae_weights = {a.alpha, a.beta, a.lambda_p};
  return cfg;
}

std::string config_text(const TrainArgs& a) {
  std::ostringstream os;
  os.precision(17);
  os << "mode=" << a.mode << "\nseed=" << a.seed << "\nsteps=" << a.steps << "\nT=" << a.T << "\nl=" << a.l
     << "\nmasking=" << (a.no_mask ? 0 : 1) << "\nsamples=" << a.samples << "\nsize=" << a.size << "\nlr=" << a.lr
     << "\nbatch=" << a.batch << "\nsaliency_source=" << a.saliency_source << "\nreduction=" << a.reduction
     << "\nhidden=" << a.hidden << "\nlatent_channels=" << a.latent_channels << "\nalpha=" << a.alpha
     << "\nbeta=" << a.beta << "\nlambda_p=" << a.lambda_p << "\n";
  return os.str();
}

std::string probe_summary(const TrainLog& log) {
  nlohmann::ordered_json j;
  j["probe_initial"] = log.probe_initial;
  j["probe_final"] = log.probe_final;
  return j.dump(2) + "\n";
}

void cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = to_config(a);
  cfg.validate();
  Rng data_rng(a.seed);
  const SyntheticDataset data = make_synthetic_dataset(data_rng, a.samples, a.size);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  TrainLog log;
  if (a.mode == "flow") {
    FlowResult r = train_flow(cfg, data.samples);
    save_checkpoint(dir, r.net.named_parameters());
    log = std::move(r.log);
  } else {
    VaeResult r = train_vae(cfg, data.samples);
    save_checkpoint(dir, r.vae.named_parameters());
    log = std::move(r.log);
  }
  write_text(dir / "train_log.csv", train_log_to_csv(log));
  write_text(dir / "summary.json", probe_summary(log));
  write_text(dir / "config.txt", config_text(a));
}

struct RegionArgs {
  std::string ckpt;
  std::string out;
  std::optional<std::uint64_t> seed;
  double threshold = 0.5;
};

template <typename T>
T config_value(const std::map<std::string, std::string>& cfg, const std::string& key, const fs::path& path) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) throw FormatError(path.string(), -1, "missing key '" + key + "'");
  std::istringstream in(it->second);
  T v{};
  in >> v;
  if (in.fail()) throw FormatError(path.string(), -1, "bad value for '" + key + "': " + it->second);
  return v;
}

void cmd_region_report(const RegionArgs& a) {
  const fs::path dir(a.ckpt);
  const fs::path cfg_path = dir / "config.txt";
  const auto cfg = parse_config_text(read_text(cfg_path));
  if (config_value<std::string>(cfg, "mode", cfg_path) != "flow") {
    throw FormatError(cfg_path.string(), -1, "region-report needs a flow checkpoint");
  }
  const auto data_seed = config_value<std::uint64_t>(cfg, "seed", cfg_path);
  Rng data_rng(data_seed);
  const SyntheticDataset data = make_synthetic_dataset(data_rng, config_value<std::size_t>(cfg, "samples", cfg_path),
                                                       config_value<std::size_t>(cfg, "size", cfg_path));
  const MaskSchedule sched{config_value<std::int64_t>(cfg, "T", cfg_path), config_value<double>(cfg, "l", cfg_path)};
  const VelocityNet net = velocity_from_checkpoint(load_checkpoint(dir));
  const RegionReport r = region_report(net, data.samples, sched, a.seed.value_or(data_seed), a.threshold);
  write_text(a.out, region_report_to_json(r));
}

// --- eval-freq -----------------------------------------------------------------

struct EvalArgs {
  std::string gen;
  std::string real;
  std::size_t depth = 3;
  double lambda_q = 0.1;
  std::string out;
};

void cmd_eval(const EvalArgs& a) {
  WqsConfig cfg;
  cfg.depth = a.depth;
  cfg.lambda_q = a.lambda_q;
  write_text(a.out, metric_report_to_json(evaluate_dirs(a.gen, a.real, cfg)));
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wavemask: wavelet saliency masks, masked flow matching and frequency metrics"};
  app.name("wavemask");
  app.footer(kFormats);
  app.require_subcommand(1);

  auto* version = app.add_subcommand("version", "Print the semantic version");

  DwtArgs dwt;
  auto* dwt_cmd = app.add_subcommand("dwt", "Multi-level Haar DWT; writes ll.lwt and l<k>_{lh,hl,hh}.lwt");
  dwt_cmd->add_option("--in", dwt.in, "Input image or tensor (PGM, PPM or LWT1)")->required();
  dwt_cmd->add_option("--depth", dwt.depth, "Decomposition levels")->capture_default_str();
  dwt_cmd->add_option("--out-dir", dwt.out_dir, "Output directory")->capture_default_str();

  IdwtArgs idwt;
  auto* idwt_cmd = app.add_subcommand("idwt", "Inverse of dwt: rebuild a tensor from a subband directory");
  idwt_cmd->add_option("--in-dir", idwt.in_dir, "Directory written by dwt")->required();
  idwt_cmd->add_option("--depth", idwt.depth, "Decomposition levels")->capture_default_str();
  idwt_cmd->add_option("--out", idwt.out, "Output LWT1 file")->required();
  idwt_cmd->add_option("--pgm", idwt.pgm, "Also write an 8-bit PGM/PPM rendering");

  SaliencyArgs sal;
  auto* sal_cmd = app.add_subcommand("saliency", "Wavelet-energy saliency map of a latent");
  sal_cmd->add_option("--in", sal.in, "Latent tensor (C x H x W, LWT1)")->required();
  sal_cmd->add_option("--out", sal.out, "Output saliency map (H x W, LWT1)")->required();
  sal_cmd->add_option("--png", sal.png, "Also write the map as an 8-bit PGM (A x 255)");
  sal_cmd->add_option("--epsilon", sal.epsilon, "Normalization guard")->capture_default_str();

  MaskArgs mask;
  auto* mask_cmd = app.add_subcommand("mask", "Time-dependent binary supervision mask");
  mask_cmd->add_option("--saliency", mask.saliency, "Saliency map (H x W, LWT1)")->required();
  mask_cmd->add_option("--T", mask.T, "Total timesteps")->capture_default_str();
  mask_cmd->add_option("--l", mask.l, "Supervision lower bound")->capture_default_str();
  auto* t_opt = mask_cmd->add_option("--t", mask.t, "Discrete timestep in [1, T]");
  auto* tau_opt = mask_cmd->add_option("--tau", mask.tau, "Continuous flow time in [0, 1], mapped to ceil(tau T)");
  t_opt->excludes(tau_opt);
  mask_cmd->add_option("--out", mask.out, "Output mask (H x W, LWT1)")->required();
  mask_cmd->add_option("--png", mask.png, "Also write the mask as an 8-bit PGM");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-demo", "Deterministic desk-scale training run");
  train_cmd->add_option("--mode", train.mode, "flow or vae")
      ->check(CLI::IsMember({"flow", "vae"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Seed for data, init and sampling")->capture_default_str();
  train_cmd->add_option("--steps", train.steps, "SGD steps")->capture_default_str();
  train_cmd->add_option("--l", train.l, "Mask lower bound")->capture_default_str();
  train_cmd->add_option("--T", train.T, "Total timesteps")->capture_default_str();
  auto* no_mask = train_cmd->add_flag("--no-mask", train.no_mask, "Train on the unmasked objective");
  train_cmd->add_option("--out-dir", train.out_dir, "Output directory")->required();
  train_cmd->add_option("--samples", train.samples, "Synthetic dataset size")->capture_default_str();
  train_cmd->add_option("--size", train.size, "Synthetic sample side length")->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--batch", train.batch, "Batch size")->capture_default_str();
  auto* source = train_cmd->add_option("--saliency-source", train.saliency_source, "z0 or zt")
                     ->check(CLI::IsMember({"z0", "zt"}))
                     ->capture_default_str();
  no_mask->excludes(source);
  train_cmd->add_option("--reduction", train.reduction, "sum or mean")
      ->check(CLI::IsMember({"sum", "mean"}))
      ->capture_default_str();
  train_cmd->add_option("--hidden", train.hidden, "Velocity net hidden width")->capture_default_str();
  train_cmd->add_option("--latent-channels", train.latent_channels, "VAE latent channels")->capture_default_str();
  train_cmd->add_option("--alpha", train.alpha, "Scale-consistency weight")->capture_default_str();
  train_cmd->add_option("--beta", train.beta, "KL weight")->capture_default_str();
  train_cmd->add_option("--lambda", train.lambda_p, "Perceptual weight")->capture_default_str();

  RegionArgs region;
  auto* region_cmd = app.add_subcommand("region-report", "Per-region residuals and supervision of a flow checkpoint");
  region_cmd->add_option("--ckpt", region.ckpt, "Directory written by train-demo --mode flow")->required();
  region_cmd->add_option("--out", region.out, "Output JSON")->required();
  region_cmd->add_option("--seed", region.seed, "Noise seed (defaults to the training seed)");
  region_cmd->add_option("--threshold", region.threshold, "Saliency split point")->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval-freq", "Frequency-aware metrics over paired image directories");
  eval_cmd->add_option("--gen", eval.gen, "Generated images")->required();
  eval_cmd->add_option("--real", eval.real, "Reference images")->required();
  eval_cmd->add_option("--depth", eval.depth, "Wavelet levels for WQS/HFE/HFEI")->capture_default_str();
  eval_cmd->add_option("--lambda-q", eval.lambda_q, "WQS distortion penalty")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Output JSON")->required();

  // CLI11 consumes a reversed argument list.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (version->parsed()) out << WAVEMASK_VERSION << "\n";
    if (dwt_cmd->parsed()) cmd_dwt(dwt);
    if (idwt_cmd->parsed()) cmd_idwt(idwt);
    if (sal_cmd->parsed()) cmd_saliency(sal);
    if (mask_cmd->parsed()) {
      if (!mask.t && !mask.tau) {
        err << "mask: one of --t or --tau is required\n";
        return kExitUsage;
      }
      cmd_mask(mask);
    }
    if (train_cmd->parsed()) cmd_train(train);
    if (region_cmd->parsed()) cmd_region_report(region);
    if (eval_cmd->parsed()) cmd_eval(eval);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const UndefinedMetric& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace wavemask::cli
