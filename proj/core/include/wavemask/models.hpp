#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavemask/objectives.hpp"
#include "wavemask/rng.hpp"
#include "wavemask/tensor.hpp"

namespace wavemask {

using NamedTensor = std::pair<std::string, Tensor>;
using ParamRefs = std::vector<std::pair<std::string, Tensor*>>;

// ---------------------------------------------------------------------------
// Velocity network
// ---------------------------------------------------------------------------

/// Two-layer perceptron applied independently at every spatial position with
/// shared weights. Per-position input is [zt(:, i, j); tau; cond] where cond
/// defaults to 0 when absent:
///   v(:, i, j) = w2 * tanh(w1 * input + b1) + b2
struct VelocityNet {
  std::size_t channels = 1;
  std::size_t hidden = 16;
  Tensor w1;  // hidden x (channels + 2)
  Tensor b1;  // hidden
  Tensor w2;  // channels x hidden
  Tensor b2;  // channels

  /// Weights and biases uniform in +-1/sqrt(fan_in), drawn in the order
  /// w1, b1, w2, b2.
  static VelocityNet init(std::size_t channels, std::size_t hidden, Rng& rng);
  static VelocityNet zeros(std::size_t channels, std::size_t hidden);

  std::size_t parameter_count() const;
  ParamRefs parameters();
  std::vector<NamedTensor> named_parameters() const;
};

struct VelocityGrads {
  Tensor w1, b1, w2, b2;
  Tensor dzt;

  ParamRefs parameters();
};

Tensor velocity_forward(const VelocityNet& net, const Tensor& zt, double tau, std::optional<double> cond = std::nullopt);

/// Exact gradients of <dv, v(zt)> with respect to every parameter and zt.
VelocityGrads velocity_backward(const VelocityNet& net, const Tensor& zt, double tau, std::optional<double> cond,
                                const Tensor& dv);

// ---------------------------------------------------------------------------
// Tiny VAE
// ---------------------------------------------------------------------------

inline constexpr double kLogvarMin = -30.0;
inline constexpr double kLogvarMax = 20.0;

/// encoder: avgpool2x, then a per-position affine map to 2C' channels
///          (first C' are mu, the rest the raw log-variance, clamped to
///          [kLogvarMin, kLogvarMax]);
/// decoder: bilinear_upsample2x, then a per-position affine map to C channels.
struct TinyVae {
  std::size_t image_channels = 1;
  std::size_t latent_channels = 4;
  Tensor enc_w;  // 2C' x C
  Tensor enc_b;  // 2C'
  Tensor dec_w;  // C x C'
  Tensor dec_b;  // C

  static TinyVae init(std::size_t image_channels, std::size_t latent_channels, Rng& rng);
  static TinyVae zeros(std::size_t image_channels, std::size_t latent_channels);

  std::size_t parameter_count() const;
  ParamRefs parameters();
  std::vector<NamedTensor> named_parameters() const;
};

/// Everything the backward pass needs. z = mu + exp(logvar / 2) * noise.
/// The scale-consistency branch decodes z_down = avgpool2x(z) and compares it
/// with x_down = avgpool2x(x).
struct VaeForward {
  Tensor pooled;
  Tensor mu;
  Tensor logvar_raw;
  Tensor logvar;
  Tensor noise;
  Tensor z;
  Tensor x_rec;
  Tensor z_down;
  Tensor x_down_rec;
  Tensor x_down;
};

/// Which terms of the VAE objective participate.
enum class VaeTerms { kFull, kReconstructionOnly };

struct VaeGrads {
  Tensor enc_w, enc_b, dec_w, dec_b;

  ParamRefs parameters();
};

/// Spatial dims of x must be divisible by 4 (the scale branch pools twice).
VaeForward vae_forward(const TinyVae& vae, const Tensor& x, Rng& rng);
VaeForward vae_forward_with_noise(const TinyVae& vae, const Tensor& x, const Tensor& noise);

Tensor vae_encode_mean(const TinyVae& vae, const Tensor& x);
Tensor vae_decode(const TinyVae& vae, const Tensor& z);

/// Loss of a forward pass, scaled by `scale` (1 for the sum convention).
LossBreakdown vae_objective(const VaeForward& fwd, const Tensor& x, const VaeLossWeights& w, VaeTerms terms,
                            const PerceptualTerm& perceptual = haar_perceptual_term());

/// Gradient of scale * vae_objective(...).total, noise held fixed.
VaeGrads vae_backward(const TinyVae& vae, const Tensor& x, const VaeForward& fwd, const VaeLossWeights& w,
                      VaeTerms terms = VaeTerms::kFull, double scale = 1.0,
                      const PerceptualTerm& perceptual = haar_perceptual_term());

// ---------------------------------------------------------------------------
// Checkpoints: one LWT1 file per tensor plus manifest.txt with one
// "name d0 d1 ..." line per tensor.
// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& dir, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& dir);

VelocityNet velocity_from_checkpoint(const std::vector<NamedTensor>& tensors);
TinyVae vae_from_checkpoint(const std::vector<NamedTensor>& tensors);

}  // namespace wavemask
