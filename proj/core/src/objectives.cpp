#include "wavemask/objectives.hpp"

#include <cmath>

#include "wavemask/error.hpp"
#include "wavemask/wavelet.hpp"

namespace wavemask {
namespace {

void check_mask(const FlowSample& sample, const Tensor& v_pred, const BinaryMask& mask, const char* what) {
  require_same_shape(sample.z0, v_pred, what);
  const auto [c, h, w] = as_chw(v_pred, what);
  (void)c;
  if (mask.mask.rank() != 2 || mask.mask.dim(0) != h || mask.mask.dim(1) != w) {
    throw InvalidArgument(std::string(what) + ": mask shape " + shape_to_string(mask.mask.shape()) +
                          " does not match spatial shape " + std::to_string(h) + "x" + std::to_string(w));
  }
}

// Checks one named term's shape pair for vae_loss.
void check_term(const Tensor& a, const Tensor& b, const std::string& term) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument("vae_loss: term '" + term + "' shape mismatch " + shape_to_string(a.shape()) + " vs " +
                          shape_to_string(b.shape()));
  }
}

}  // namespace

FlowSample make_flow_sample(Tensor z0, Tensor eps, double tau, std::optional<double> cond) {
  require_same_shape(z0, eps, "make_flow_sample");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("make_flow_sample: tau must lie in [0, 1]");
  Tensor zt(z0.shape());
  for (std::size_t k = 0; k < zt.size(); ++k) zt[k] = (1.0 - tau) * z0[k] + tau * eps[k];
  return {std::move(z0), std::move(eps), tau, std::move(zt), cond};
}

LossBreakdown fm_loss(const FlowSample& sample, const Tensor& v_pred) {
  require_same_shape(sample.z0, v_pred, "fm_loss");
  require_same_shape(sample.eps, v_pred, "fm_loss");
  double total = 0.0;
  for (std::size_t k = 0; k < v_pred.size(); ++k) {
    const double r = (sample.eps[k] - sample.z0[k]) - v_pred[k];
    total += r * r;
  }
  return {total, {{"fm", total}}, v_pred.size()};
}

LossBreakdown masked_fm_loss(const FlowSample& sample, const Tensor& v_pred, const BinaryMask& mask) {
  check_mask(sample, v_pred, mask, "masked_fm_loss");
  const std::size_t plane = mask.mask.size();
  double total = 0.0;
  std::size_t active = 0;
  // Same traversal order as fm_loss; masked-out terms are skipped, not added
  // as zeros, so the all-ones case reproduces fm_loss bit for bit.
  for (std::size_t k = 0; k < v_pred.size(); ++k) {
    if (mask.mask[k % plane] == 0.0) continue;
    const double r = (sample.eps[k] - sample.z0[k]) - v_pred[k];
    total += r * r;
    ++active;
  }
  return {total, {{"masked_fm", total}}, active};
}

Tensor masked_fm_loss_grad(const FlowSample& sample, const Tensor& v_pred, const BinaryMask& mask) {
  check_mask(sample, v_pred, mask, "masked_fm_loss_grad");
  const std::size_t plane = mask.mask.size();
  Tensor grad(v_pred.shape());
  for (std::size_t k = 0; k < v_pred.size(); ++k) {
    const double r = (sample.eps[k] - sample.z0[k]) - v_pred[k];
    grad[k] = -2.0 * mask.mask[k % plane] * r;
  }
  return grad;
}

double kl_diag_gaussian(const Tensor& mu, const Tensor& logvar) {
  require_same_shape(mu, logvar, "kl_diag_gaussian");
  double kl = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    kl += 0.5 * (mu[k] * mu[k] + std::exp(logvar[k]) - 1.0 - logvar[k]);
  }
  return kl;
}

double perceptual_proxy(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "perceptual_proxy");
  const SubbandSet da = dwt2(a);
  const SubbandSet db = dwt2(b);
  double s = 0.0;
  for (std::size_t k = 0; k < da.ll.size(); ++k) {
    const double lh = da.lh[k] - db.lh[k];
    const double hl = da.hl[k] - db.hl[k];
    const double hh = da.hh[k] - db.hh[k];
    s += lh * lh + hl * hl + hh * hh;
  }
  return s / static_cast<double>(da.ll.size());
}

Tensor perceptual_proxy_grad(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "perceptual_proxy_grad");
  const SubbandSet da = dwt2(a);
  const SubbandSet db = dwt2(b);
  const double scale = 2.0 / static_cast<double>(da.ll.size());
  // The Haar analysis operator is orthonormal, so its adjoint is idwt2.
  SubbandSet g{Tensor(da.ll.shape()), (da.lh - db.lh) * scale, (da.hl - db.hl) * scale, (da.hh - db.hh) * scale};
  return idwt2(g);
}

PerceptualTerm haar_perceptual_term() { return {perceptual_proxy, perceptual_proxy_grad}; }

void VaeLossWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && lambda_p >= 0.0)) {
    throw InvalidArgument("VAE loss weights must be non-negative");
  }
}

LossBreakdown vae_loss(const Tensor& x, const Tensor& x_rec, const Tensor& x_down_rec, const Tensor& x_down,
                       const Tensor& mu, const Tensor& logvar, const VaeLossWeights& w,
                       const PerceptualTerm& perceptual) {
  w.validate();
  check_term(x_rec, x, "recon");
  check_term(x_down_rec, x_down, "scale_consistency");
  check_term(mu, logvar, "kl");
  const double recon = (x_rec - x).sum_squares();
  const double sc = (x_down_rec - x_down).sum_squares();
  const double kl = kl_diag_gaussian(mu, logvar);
  const double p = perceptual.value(x_rec, x);
  LossBreakdown out;
  out.total = recon + w.alpha * sc + w.beta * kl + w.lambda_p * p;
  out.components = {{"recon", recon}, {"scale_consistency", sc}, {"kl", kl}, {"perceptual", p}};
  out.active_element_count = x.size();
  return out;
}

}  // namespace wavemask
