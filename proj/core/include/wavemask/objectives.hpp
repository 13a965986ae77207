#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "wavemask/masking.hpp"
#include "wavemask/tensor.hpp"

namespace wavemask {

/// Linear interpolant between a clean latent and noise:
///   zt = (1 - tau) * z0 + tau * eps.
struct FlowSample {
  Tensor z0;
  Tensor eps;
  double tau = 0.0;
  Tensor zt;
  std::optional<double> cond;

  /// eps - z0, the regression target for the velocity field.
  Tensor target_velocity() const { return eps - z0; }
};

FlowSample make_flow_sample(Tensor z0, Tensor eps, double tau, std::optional<double> cond = std::nullopt);

/// Result of a loss evaluation. `total` is the sum-convention value; the
/// components are the terms it was built from (already unweighted, see each
/// producer for the combination rule).
struct LossBreakdown {
  double total = 0.0;
  std::map<std::string, double> components;
  std::size_t active_element_count = 0;

  /// total / active_element_count, or 0 when nothing is active.
  double mean_per_active() const {
    return active_element_count ? total / static_cast<double>(active_element_count) : 0.0;
  }
};

/// ||(eps - z0) - v_pred||^2. Component "fm" equals total.
LossBreakdown fm_loss(const FlowSample& sample, const Tensor& v_pred);

/// ||M (.) [(eps - z0) - v_pred]||^2 with the H x W mask broadcast over
/// channels. Component "masked_fm" equals total. With an all-ones mask the
/// result is bitwise identical to fm_loss.
LossBreakdown masked_fm_loss(const FlowSample& sample, const Tensor& v_pred, const BinaryMask& mask);

/// d(masked_fm_loss)/d(v_pred) = -2 M (.) r.
Tensor masked_fm_loss_grad(const FlowSample& sample, const Tensor& v_pred, const BinaryMask& mask);

/// KL(N(mu, exp(logvar)) || N(0, 1)) summed over elements.
double kl_diag_gaussian(const Tensor& mu, const Tensor& logvar);

/// Differentiable stand-in for a learned perceptual distance.
struct PerceptualTerm {
  std::function<double(const Tensor&, const Tensor&)> value;
  /// Gradient with respect to the first argument.
  std::function<Tensor(const Tensor&, const Tensor&)> grad;
};

/// Mean squared difference of level-1 Haar detail coefficients, averaged
/// over channel-positions of one subband:
///   (1 / (C h w)) sum over (c, i, j) of dLH^2 + dHL^2 + dHH^2.
/// Blind to constant offsets; zero iff the detail bands agree.
double perceptual_proxy(const Tensor& a, const Tensor& b);
Tensor perceptual_proxy_grad(const Tensor& a, const Tensor& b);
PerceptualTerm haar_perceptual_term();

/// Weights of the four-term VAE objective.
struct VaeLossWeights {
  double alpha = 0.25;      // scale consistency
  double beta = 0.001;      // KL
  double lambda_p = 0.05;   // perceptual

  void validate() const;
};

/// total = ||x_rec - x||^2 + alpha ||x_down_rec - x_down||^2 + beta KL + lambda_p P(x_rec, x)
/// Components: recon, scale_consistency, kl, perceptual (unweighted).
LossBreakdown vae_loss(const Tensor& x, const Tensor& x_rec, const Tensor& x_down_rec, const Tensor& x_down,
                       const Tensor& mu, const Tensor& logvar, const VaeLossWeights& w,
                       const PerceptualTerm& perceptual = haar_perceptual_term());

}  // namespace wavemask
