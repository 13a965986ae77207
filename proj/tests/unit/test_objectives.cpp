#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "test_support.hpp"
#include "wavemask/error.hpp"
#include "wavemask/objectives.hpp"

using namespace wavemask;
using wavemask::testing::checkerboard;
using wavemask::testing::finite_difference;
using wavemask::testing::random_tensor;
using wavemask::testing::rel_err;

namespace {

// Sample with target velocity eps - z0 = r + v, so that the residual is r.
FlowSample with_residual(const Tensor& r, const Tensor& v) {
  return make_flow_sample(Tensor(r.shape()), r + v, 0.5);
}

BinaryMask ones_like(std::size_t h, std::size_t w) { return {Tensor({h, w}, 1.0), 1}; }

}  // namespace

TEST_CASE("flow interpolant examples") {
  std::mt19937_64 gen(1);
  const Tensor z0 = random_tensor(gen, {2, 3, 3});
  const Tensor eps = random_tensor(gen, {2, 3, 3});
  CHECK(make_flow_sample(z0, eps, 0.0).zt == z0);
  CHECK(make_flow_sample(z0, eps, 1.0).zt == eps);
  CHECK(make_flow_sample(Tensor({1}, 2.0), Tensor({1}, 0.0), 0.25).zt[0] == 1.5);
  CHECK(make_flow_sample(z0, eps, 0.3, 2.0).cond == 2.0);
  CHECK_THROWS_AS(make_flow_sample(z0, eps, -0.1), InvalidArgument);
  CHECK_THROWS_AS(make_flow_sample(z0, Tensor({2, 3, 4}), 0.5), InvalidArgument);
}

TEST_CASE("flow matching loss examples") {
  const Tensor r = Tensor::from_rows({{1, 2}, {3, 4}});
  const Tensor zero({2, 2});
  const FlowSample s = with_residual(r, zero);
  CHECK(fm_loss(s, s.target_velocity()).total == 0.0);

  const LossBreakdown l = fm_loss(s, zero);
  CHECK(l.total == 30.0);
  CHECK(l.components.at("fm") == 30.0);
  CHECK(l.active_element_count == 4);
  CHECK(fm_loss(with_residual(3.0 * r, zero), zero).total == doctest::Approx(9.0 * 30.0));

  const BinaryMask diag{Tensor::from_rows({{1, 0}, {0, 1}}), 1};
  const LossBreakdown m = masked_fm_loss(s, zero, diag);
  CHECK(m.total == 17.0);
  CHECK(m.active_element_count == 2);
  CHECK(m.mean_per_active() == 8.5);

  const BinaryMask none{Tensor({2, 2}, 0.0), 1};
  const LossBreakdown z = masked_fm_loss(s, zero, none);
  CHECK(z.total == 0.0);
  CHECK(z.active_element_count == 0);
  CHECK(z.mean_per_active() == 0.0);
}

TEST_CASE("all-ones mask is bitwise identical to the plain loss") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor z0 = random_tensor(gen, {3, 4, 6}), eps = random_tensor(gen, {3, 4, 6});
    const Tensor v = random_tensor(gen, {3, 4, 6});
    const FlowSample s = make_flow_sample(z0, eps, 0.37);
    const double a = fm_loss(s, v).total;
    const double b = masked_fm_loss(s, v, ones_like(4, 6)).total;
    REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);
  }
}

TEST_CASE("masked loss broadcasts the mask over channels") {
  const Tensor r({2, 2, 2}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  const FlowSample s = with_residual(r, Tensor({2, 2, 2}));
  const BinaryMask m{Tensor::from_rows({{0, 1}, {1, 0}}), 1};
  CHECK(masked_fm_loss(s, Tensor({2, 2, 2}), m).total == 4.0 + 9.0 + 36.0 + 49.0);
  CHECK_THROWS_AS(masked_fm_loss(s, Tensor({2, 2, 2}), ones_like(3, 2)), InvalidArgument);
}

TEST_CASE("masked loss gradient") {
  const Tensor zero({1, 2, 2});
  const FlowSample s0 = make_flow_sample(zero, zero, 0.5);
  CHECK(masked_fm_loss_grad(s0, zero, ones_like(2, 2)).sum_squares() == 0.0);

  std::mt19937_64 gen(3);
  const Tensor z0 = random_tensor(gen, {1, 4, 4}), eps = random_tensor(gen, {1, 4, 4});
  Tensor v = random_tensor(gen, {1, 4, 4});
  const FlowSample s = make_flow_sample(z0, eps, 0.6);
  BinaryMask m{random_tensor(gen, {4, 4}, 0.0, 1.0), 1};
  for (double& x : m.mask.data()) x = x < 0.5 ? 0.0 : 1.0;

  const Tensor g = masked_fm_loss_grad(s, v, m);
  for (std::size_t k = 0; k < 16; ++k) {
    if (m.mask[k] == 0.0) CHECK(g[k] == 0.0);
  }
  const Tensor fd = finite_difference(v, [&] { return masked_fm_loss(s, v, m).total; });
  for (std::size_t k = 0; k < 16; ++k) CHECK(rel_err(g[k], fd[k]) < 1e-6);
}

TEST_CASE("KL divergence closed forms") {
  CHECK(kl_diag_gaussian(Tensor({3}), Tensor({3})) == 0.0);
  CHECK(kl_diag_gaussian(Tensor({1}, 1.0), Tensor({1}, 0.0)) == 0.5);
  const double expected = 0.5 * (4.0 - 1.0 - std::log(4.0));
  CHECK(kl_diag_gaussian(Tensor({1}, 0.0), Tensor({1}, std::log(4.0))) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.8069).epsilon(1e-4));
  CHECK_THROWS_AS(kl_diag_gaussian(Tensor({2}), Tensor({3})), InvalidArgument);
}

TEST_CASE("perceptual proxy") {
  std::mt19937_64 gen(4);
  const Tensor a = random_tensor(gen, {2, 6, 6});
  CHECK(perceptual_proxy(a, a) == 0.0);
  CHECK(perceptual_proxy(a, a + Tensor({2, 6, 6}, 0.75)) < 1e-28);

  // Unit checkerboard: HH = 1 on every block, LH = HL = 0.
  const Tensor cb = checkerboard(8, 8, 0.0, 1.0);
  CHECK(perceptual_proxy(Tensor({8, 8}, 0.5), cb) == doctest::Approx(1.0).epsilon(1e-15));

  Tensor x = random_tensor(gen, {2, 4, 4});
  const Tensor y = random_tensor(gen, {2, 4, 4});
  const Tensor g = perceptual_proxy_grad(x, y);
  const Tensor fd = finite_difference(x, [&] { return perceptual_proxy(x, y); });
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(rel_err(g[k], fd[k]) < 1e-6);

  const PerceptualTerm term = haar_perceptual_term();
  CHECK(term.value(x, y) == perceptual_proxy(x, y));
}

TEST_CASE("VAE loss weighting") {
  // recon = 2, scale = 4, kl = 10, proxy = 1 with the default weights.
  const Tensor x({1, 2, 2});
  Tensor x_rec({1, 2, 2});
  x_rec[0] = 1.0;
  x_rec[1] = 1.0;
  const Tensor x_down({1, 1, 1});
  const Tensor x_down_rec({1, 1, 1}, 2.0);
  const Tensor mu({1}, std::sqrt(20.0));
  const Tensor lv({1}, 0.0);
  const PerceptualTerm unit{[](const Tensor&, const Tensor&) { return 1.0; },
                            [](const Tensor& a, const Tensor&) { return Tensor(a.shape()); }};
  const LossBreakdown l = vae_loss(x, x_rec, x_down_rec, x_down, mu, lv, VaeLossWeights{}, unit);
  CHECK(l.components.at("recon") == 2.0);
  CHECK(l.components.at("scale_consistency") == 4.0);
  CHECK(l.components.at("kl") == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(l.components.at("perceptual") == 1.0);
  CHECK(l.total == doctest::Approx(3.06).epsilon(1e-14));

  const LossBreakdown plain = vae_loss(x, x_rec, x_down_rec, x_down, mu, lv, VaeLossWeights{0, 0, 0}, unit);
  CHECK(plain.total == 2.0);

  const LossBreakdown perfect =
      vae_loss(x, x, x_down, x_down, Tensor({1}), Tensor({1}), VaeLossWeights{}, haar_perceptual_term());
  CHECK(perfect.total == 0.0);
}

TEST_CASE("VAE loss errors name the offending term") {
  const Tensor x({1, 2, 2});
  try {
    vae_loss(x, x, Tensor({1, 1, 2}), Tensor({1, 1, 1}), Tensor({1}), Tensor({1}), VaeLossWeights{});
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("scale") != std::string::npos);
  }
  CHECK_THROWS_AS(VaeLossWeights({-1.0, 0.0, 0.0}).validate(), InvalidArgument);
}
