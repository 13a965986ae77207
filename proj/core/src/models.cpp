#include "wavemask/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "wavemask/error.hpp"
#include "wavemask/io.hpp"
#include "wavemask/resample.hpp"

namespace wavemask {
namespace {

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
}

// out(o, p) = sum_i w(o, i) x(i, p) + b(o) for every spatial position p.
Tensor affine_per_position(const Tensor& w, const Tensor& b, const Tensor& x) {
  const auto [cin, h, wd] = as_chw(x, "affine_per_position");
  const std::size_t cout = w.dim(0), plane = h * wd;
  if (w.dim(1) != cin) throw InvalidArgument("affine_per_position: weight/input channel mismatch");
  Tensor out({cout, h, wd});
  for (std::size_t o = 0; o < cout; ++o) {
    double* dst = out.data().data() + o * plane;
    std::fill(dst, dst + plane, b[o]);
    for (std::size_t i = 0; i < cin; ++i) {
      const double wi = w[o * cin + i];
      const double* src = x.data().data() + i * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] += wi * src[p];
    }
  }
  return out;
}

// Accumulates dW += g x^T, db += sum g, and returns W^T g.
Tensor affine_per_position_backward(const Tensor& w, const Tensor& x, const Tensor& g, Tensor& dw, Tensor& db) {
  const auto [cin, h, wd] = as_chw(x, "affine_per_position_backward");
  const std::size_t cout = w.dim(0), plane = h * wd;
  Tensor dx({cin, h, wd});
  for (std::size_t o = 0; o < cout; ++o) {
    const double* go = g.data().data() + o * plane;
    double bsum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) bsum += go[p];
    db[o] += bsum;
    for (std::size_t i = 0; i < cin; ++i) {
      const double* xi = x.data().data() + i * plane;
      double* dxi = dx.data().data() + i * plane;
      const double wi = w[o * cin + i];
      double acc = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        acc += go[p] * xi[p];
        dxi[p] += wi * go[p];
      }
      dw[o * cin + i] += acc;
    }
  }
  return dx;
}

Tensor as_3d(const Tensor& t) {
  const auto [c, h, w] = as_chw(t, "tensor");
  return t.rank() == 3 ? t : t.reshaped({c, h, w});
}

const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint", -1, "missing tensor '" + name + "'");
}

}  // namespace

// --- VelocityNet -------------------------------------------------------------

VelocityNet VelocityNet::zeros(std::size_t channels, std::size_t hidden) {
  if (channels == 0 || hidden == 0) throw InvalidArgument("VelocityNet: channels and hidden must be >= 1");
  VelocityNet net;
  net.channels = channels;
  net.hidden = hidden;
  net.w1 = Tensor({hidden, channels + 2});
  net.b1 = Tensor({hidden});
  net.w2 = Tensor({channels, hidden});
  net.b2 = Tensor({channels});
  return net;
}

VelocityNet VelocityNet::init(std::size_t channels, std::size_t hidden, Rng& rng) {
  VelocityNet net = zeros(channels, hidden);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(channels + 2));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(net.w1, bound1, rng);
  fill_uniform(net.b1, bound1, rng);
  fill_uniform(net.w2, bound2, rng);
  fill_uniform(net.b2, bound2, rng);
  return net;
}

std::size_t VelocityNet::parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

ParamRefs VelocityNet::parameters() { return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}}; }

std::vector<NamedTensor> VelocityNet::named_parameters() const { return {{"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", b2}}; }

ParamRefs VelocityGrads::parameters() { return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2}, {"b2", &b2}}; }

namespace {

void check_velocity_input(const VelocityNet& net, const Tensor& zt) {
  const auto [c, h, w] = as_chw(zt, "velocity_forward");
  (void)h;
  (void)w;
  if (c != net.channels) {
    throw InvalidArgument("velocity net expects " + std::to_string(net.channels) + " channels, got " +
                          std::to_string(c));
  }
}

// Hidden pre-activation for one position; `in` has channels + 2 entries.
void hidden_forward(const VelocityNet& net, const std::vector<double>& in, std::vector<double>& act) {
  const std::size_t n_in = net.channels + 2;
  for (std::size_t k = 0; k < net.hidden; ++k) {
    double s = net.b1[k];
    for (std::size_t i = 0; i < n_in; ++i) s += net.w1[k * n_in + i] * in[i];
    act[k] = std::tanh(s);
  }
}

}  // namespace

Tensor velocity_forward(const VelocityNet& net, const Tensor& zt, double tau, std::optional<double> cond) {
  check_velocity_input(net, zt);
  const auto [c, h, w] = as_chw(zt, "velocity_forward");
  const std::size_t plane = h * w;
  Tensor out(zt.shape());
  std::vector<double> in(c + 2), act(net.hidden);
  in[c] = tau;
  in[c + 1] = cond.value_or(0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) in[ch] = zt[ch * plane + p];
    hidden_forward(net, in, act);
    for (std::size_t o = 0; o < c; ++o) {
      double s = net.b2[o];
      for (std::size_t k = 0; k < net.hidden; ++k) s += net.w2[o * net.hidden + k] * act[k];
      out[o * plane + p] = s;
    }
  }
  return out;
}

VelocityGrads velocity_backward(const VelocityNet& net, const Tensor& zt, double tau, std::optional<double> cond,
                                const Tensor& dv) {
  check_velocity_input(net, zt);
  require_same_shape(zt, dv, "velocity_backward");
  const auto [c, h, w] = as_chw(zt, "velocity_backward");
  const std::size_t plane = h * w, n_in = c + 2;
  VelocityGrads g{Tensor(net.w1.shape()), Tensor(net.b1.shape()), Tensor(net.w2.shape()), Tensor(net.b2.shape()),
                  Tensor(zt.shape())};
  std::vector<double> in(n_in), act(net.hidden), gpre(net.hidden);
  in[c] = tau;
  in[c + 1] = cond.value_or(0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) in[ch] = zt[ch * plane + p];
    hidden_forward(net, in, act);
    std::fill(gpre.begin(), gpre.end(), 0.0);
    for (std::size_t o = 0; o < c; ++o) {
      const double go = dv[o * plane + p];
      g.b2[o] += go;
      for (std::size_t k = 0; k < net.hidden; ++k) {
        g.w2[o * net.hidden + k] += go * act[k];
        gpre[k] += net.w2[o * net.hidden + k] * go;
      }
    }
    for (std::size_t k = 0; k < net.hidden; ++k) {
      gpre[k] *= 1.0 - act[k] * act[k];
      g.b1[k] += gpre[k];
      for (std::size_t i = 0; i < n_in; ++i) g.w1[k * n_in + i] += gpre[k] * in[i];
      for (std::size_t ch = 0; ch < c; ++ch) g.dzt[ch * plane + p] += net.w1[k * n_in + ch] * gpre[k];
    }
  }
  return g;
}

// --- TinyVae -----------------------------------------------------------------

TinyVae TinyVae::zeros(std::size_t image_channels, std::size_t latent_channels) {
  if (image_channels == 0 || latent_channels == 0) throw InvalidArgument("TinyVae: channel counts must be >= 1");
  TinyVae vae;
  vae.image_channels = image_channels;
  vae.latent_channels = latent_channels;
  vae.enc_w = Tensor({2 * latent_channels, image_channels});
  vae.enc_b = Tensor({2 * latent_channels});
  vae.dec_w = Tensor({image_channels, latent_channels});
  vae.dec_b = Tensor({image_channels});
  return vae;
}

TinyVae TinyVae::init(std::size_t image_channels, std::size_t latent_channels, Rng& rng) {
  TinyVae vae = zeros(image_channels, latent_channels);
  const double enc_bound = 1.0 / std::sqrt(static_cast<double>(image_channels));
  const double dec_bound = 1.0 / std::sqrt(static_cast<double>(latent_channels));
  fill_uniform(vae.enc_w, enc_bound, rng);
  fill_uniform(vae.enc_b, enc_bound, rng);
  fill_uniform(vae.dec_w, dec_bound, rng);
  fill_uniform(vae.dec_b, dec_bound, rng);
  return vae;
}

std::size_t TinyVae::parameter_count() const { return enc_w.size() + enc_b.size() + dec_w.size() + dec_b.size(); }

ParamRefs TinyVae::parameters() {
  return {{"enc_w", &enc_w}, {"enc_b", &enc_b}, {"dec_w", &dec_w}, {"dec_b", &dec_b}};
}

std::vector<NamedTensor> TinyVae::named_parameters() const {
  return {{"enc_w", enc_w}, {"enc_b", enc_b}, {"dec_w", dec_w}, {"dec_b", dec_b}};
}

ParamRefs VaeGrads::parameters() {
  return {{"enc_w", &enc_w}, {"enc_b", &enc_b}, {"dec_w", &dec_w}, {"dec_b", &dec_b}};
}

Tensor vae_decode(const TinyVae& vae, const Tensor& z) {
  return affine_per_position(vae.dec_w, vae.dec_b, bilinear_upsample2x(as_3d(z)));
}

Tensor vae_encode_mean(const TinyVae& vae, const Tensor& x) {
  const Tensor enc = affine_per_position(vae.enc_w, vae.enc_b, avgpool2x(as_3d(x)));
  const std::size_t plane = enc.dim(1) * enc.dim(2);
  std::vector<double> mu(enc.values().begin(), enc.values().begin() + vae.latent_channels * plane);
  return Tensor({vae.latent_channels, enc.dim(1), enc.dim(2)}, std::move(mu));
}

VaeForward vae_forward_with_noise(const TinyVae& vae, const Tensor& x, const Tensor& noise) {
  const auto [c, h, w] = as_chw(x, "vae_forward");
  if (c != vae.image_channels) {
    throw InvalidArgument("vae_forward: expected " + std::to_string(vae.image_channels) + " channels, got " +
                          std::to_string(c));
  }
  if (h % 4 || w % 4) {
    throw InvalidArgument("vae_forward: spatial dims must be divisible by 4, got " + shape_to_string(x.shape()));
  }
  const std::size_t lc = vae.latent_channels, lh = h / 2, lw = w / 2, plane = lh * lw;
  const Shape latent_shape{lc, lh, lw};
  if (noise.shape() != latent_shape) {
    throw InvalidArgument("vae_forward: noise shape " + shape_to_string(noise.shape()) + " does not match latent " +
                          shape_to_string(latent_shape));
  }
  VaeForward f;
  f.pooled = avgpool2x(as_3d(x));
  const Tensor enc = affine_per_position(vae.enc_w, vae.enc_b, f.pooled);
  f.mu = Tensor(latent_shape);
  f.logvar_raw = Tensor(latent_shape);
  f.logvar = Tensor(latent_shape);
  f.z = Tensor(latent_shape);
  f.noise = noise;
  for (std::size_t k = 0; k < lc * plane; ++k) {
    f.mu[k] = enc[k];
    f.logvar_raw[k] = enc[lc * plane + k];
    f.logvar[k] = std::clamp(f.logvar_raw[k], kLogvarMin, kLogvarMax);
    f.z[k] = f.mu[k] + std::exp(0.5 * f.logvar[k]) * noise[k];
  }
  f.x_rec = vae_decode(vae, f.z);
  f.z_down = avgpool2x(f.z);
  f.x_down_rec = vae_decode(vae, f.z_down);
  f.x_down = avgpool2x(as_3d(x));
  return f;
}

VaeForward vae_forward(const TinyVae& vae, const Tensor& x, Rng& rng) {
  const auto [c, h, w] = as_chw(x, "vae_forward");
  (void)c;
  if (h % 2 || w % 2) throw InvalidArgument("vae_forward: spatial dims must be even, got " + shape_to_string(x.shape()));
  const Tensor noise = gaussian_sample(rng, {vae.latent_channels, h / 2, w / 2});
  return vae_forward_with_noise(vae, x, noise);
}

LossBreakdown vae_objective(const VaeForward& fwd, const Tensor& x, const VaeLossWeights& w, VaeTerms terms,
                            const PerceptualTerm& perceptual) {
  const Tensor x3 = as_3d(x);
  if (terms == VaeTerms::kReconstructionOnly) {
    require_same_shape(fwd.x_rec, x3, "vae_objective");
    const double recon = (fwd.x_rec - x3).sum_squares();
    return {recon, {{"recon", recon}}, x3.size()};
  }
  return vae_loss(x3, fwd.x_rec, fwd.x_down_rec, fwd.x_down, fwd.mu, fwd.logvar, w, perceptual);
}

VaeGrads vae_backward(const TinyVae& vae, const Tensor& x, const VaeForward& fwd, const VaeLossWeights& w,
                      VaeTerms terms, double scale, const PerceptualTerm& perceptual) {
  const Tensor x3 = as_3d(x);
  VaeGrads g{Tensor(vae.enc_w.shape()), Tensor(vae.enc_b.shape()), Tensor(vae.dec_w.shape()),
             Tensor(vae.dec_b.shape())};
  const bool full = terms == VaeTerms::kFull;

  // Reconstruction (+ perceptual) branch.
  Tensor g_xrec = (fwd.x_rec - x3) * (2.0 * scale);
  if (full && w.lambda_p != 0.0) g_xrec += perceptual.grad(fwd.x_rec, x3) * (w.lambda_p * scale);
  const Tensor up = bilinear_upsample2x(fwd.z);
  Tensor g_z = bilinear_upsample2x_adjoint(affine_per_position_backward(vae.dec_w, up, g_xrec, g.dec_w, g.dec_b));

  // Scale-consistency branch through z_down = avgpool2x(z).
  if (full && w.alpha != 0.0) {
    const Tensor g_xdr = (fwd.x_down_rec - fwd.x_down) * (2.0 * w.alpha * scale);
    const Tensor up_down = bilinear_upsample2x(fwd.z_down);
    const Tensor g_zdown =
        bilinear_upsample2x_adjoint(affine_per_position_backward(vae.dec_w, up_down, g_xdr, g.dec_w, g.dec_b));
    g_z += avgpool2x_adjoint(g_zdown);
  }

  // Reparameterization and KL, then the clamp on the raw log-variance.
  const std::size_t n = fwd.mu.size();
  const std::size_t lh = fwd.mu.dim(1), lw = fwd.mu.dim(2);
  Tensor g_enc({2 * vae.latent_channels, lh, lw});
  const double kl_scale = full ? w.beta * scale : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double sigma = std::exp(0.5 * fwd.logvar[k]);
    double g_mu = g_z[k];
    double g_lv = g_z[k] * fwd.noise[k] * 0.5 * sigma;
    if (kl_scale != 0.0) {
      g_mu += kl_scale * fwd.mu[k];
      g_lv += kl_scale * 0.5 * (std::exp(fwd.logvar[k]) - 1.0);
    }
    const bool clamped = fwd.logvar_raw[k] < kLogvarMin || fwd.logvar_raw[k] > kLogvarMax;
    g_enc[k] = g_mu;
    g_enc[n + k] = clamped ? 0.0 : g_lv;
  }
  affine_per_position_backward(vae.enc_w, fwd.pooled, g_enc, g.enc_w, g.enc_b);
  return g;
}

// --- Checkpoints -------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& dir, const std::vector<NamedTensor>& tensors) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  for (const auto& [name, t] : tensors) {
    io::write_lwt(dir / (name + ".lwt"), t);
    manifest << name;
    for (std::size_t d : t.shape()) manifest << ' ' << d;
    manifest << '\n';
  }
  const std::string text = manifest.str();
  io::write_file(dir / "manifest.txt", std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.txt";
  std::ifstream in(manifest_path);
  if (!in) throw FormatError(manifest_path.string(), -1, "cannot open checkpoint manifest");
  std::vector<NamedTensor> out;
  std::string line;
  std::int64_t offset = 0;
  while (std::getline(in, line)) {
    const std::int64_t line_offset = offset;
    offset += static_cast<std::int64_t>(line.size()) + 1;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name;
    fields >> name;
    Shape shape;
    std::size_t d = 0;
    while (fields >> d) shape.push_back(d);
    if (name.empty() || shape.empty() || !fields.eof()) {
      throw FormatError(manifest_path.string(), line_offset, "malformed manifest line '" + line + "'");
    }
    Tensor t = io::read_lwt(dir / (name + ".lwt"));
    if (t.shape() != shape) {
      throw FormatError(manifest_path.string(), line_offset,
                        "tensor '" + name + "' has shape " + shape_to_string(t.shape()) + ", manifest says " +
                            shape_to_string(shape));
    }
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

VelocityNet velocity_from_checkpoint(const std::vector<NamedTensor>& tensors) {
  const Tensor& w1 = find_tensor(tensors, "w1");
  const Tensor& w2 = find_tensor(tensors, "w2");
  if (w1.rank() != 2 || w2.rank() != 2 || w1.dim(1) < 3) throw FormatError("checkpoint", -1, "bad velocity weights");
  VelocityNet net = VelocityNet::zeros(w1.dim(1) - 2, w1.dim(0));
  net.w1 = w1;
  net.b1 = find_tensor(tensors, "b1");
  net.w2 = w2;
  net.b2 = find_tensor(tensors, "b2");
  if (net.b1.shape() != Shape{net.hidden} || net.w2.shape() != Shape{net.channels, net.hidden} ||
      net.b2.shape() != Shape{net.channels}) {
    throw FormatError("checkpoint", -1, "inconsistent velocity net tensor shapes");
  }
  return net;
}

TinyVae vae_from_checkpoint(const std::vector<NamedTensor>& tensors) {
  const Tensor& dec_w = find_tensor(tensors, "dec_w");
  if (dec_w.rank() != 2) throw FormatError("checkpoint", -1, "bad decoder weights");
  TinyVae vae = TinyVae::zeros(dec_w.dim(0), dec_w.dim(1));
  vae.enc_w = find_tensor(tensors, "enc_w");
  vae.enc_b = find_tensor(tensors, "enc_b");
  vae.dec_w = dec_w;
  vae.dec_b = find_tensor(tensors, "dec_b");
  const std::size_t c = vae.image_channels, lc = vae.latent_channels;
  if (vae.enc_w.shape() != Shape{2 * lc, c} || vae.enc_b.shape() != Shape{2 * lc} || vae.dec_b.shape() != Shape{c}) {
    throw FormatError("checkpoint", -1, "inconsistent VAE tensor shapes");
  }
  return vae;
}

}  // namespace wavemask
