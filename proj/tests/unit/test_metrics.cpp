#include <doctest.h>

#include <cmath>
#include <random>

#include "metric_oracles.hpp"
#include "test_support.hpp"
#include "wavemask/error.hpp"
#include "wavemask/io.hpp"
#include "wavemask/metrics.hpp"
#include "wavemask/wavelet.hpp"

using namespace wavemask;
using wavemask::testing::checkerboard;
using wavemask::testing::random_tensor;
using wavemask::testing::TempDir;

namespace {

oracle::Plane to_plane(const Tensor& t) {
  const auto [c, h, w] = as_chw(t, "plane");
  (void)c;
  oracle::Plane p = oracle::zeros(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) p[i][j] = t[i * w + j];
  return p;
}

Tensor to_tensor(const oracle::Plane& p) {
  Tensor t({1, p.size(), p[0].size()});
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[0].size(); ++j) t.at(0, i, j) = p[i][j];
  return t;
}

}  // namespace

TEST_CASE("HLFR examples") {
  CHECK(hlfr(Tensor({1, 8, 8}, 0.3)) == 0.0);
  CHECK(hlfr(checkerboard(8, 8, 0.0, 1.0)) == 1.0);
  std::mt19937_64 gen(1);
  const Tensor x = random_tensor(gen, {1, 8, 8}, 0.0, 1.0);
  CHECK(hlfr(x + Tensor({1, 8, 8}, 0.5)) < hlfr(x));
  CHECK_THROWS_AS(hlfr(Tensor({1, 4, 4})), UndefinedMetric);
  CHECK_THROWS_AS(hlfr(Tensor({1, 3, 4}, 1.0)), InvalidArgument);
}

TEST_CASE("RDR") {
  std::mt19937_64 gen(2);
  const Tensor a = random_tensor(gen, {1, 8, 8}, 0.0, 1.0);
  const Tensor b = random_tensor(gen, {1, 8, 8}, 0.0, 1.0);
  CHECK(rdr(a, a) == 0.0);
  CHECK(rdr(a, b) == rdr(b, a));
  CHECK(std::abs(0.08 - 0.056) == doctest::Approx(0.024));
}

TEST_CASE("HFE and HFEI") {
  CHECK(hfe(Tensor({1, 8, 8}, 0.7), 2) == 0.0);
  CHECK(hfe(checkerboard(8, 8, 0.0, 1.0), 1) == 16.0);

  std::mt19937_64 gen(3);
  const Tensor x = random_tensor(gen, {2, 8, 8});
  const SubbandSet b = dwt2(x);
  CHECK(hfe(x, 1) == doctest::Approx(x.sum_squares() - b.ll.sum_squares()).epsilon(1e-12));

  const Tensor y = random_tensor(gen, {2, 8, 8});
  CHECK(hfei(x, x, 2) == 0.0);
  CHECK(hfei(x, y, 2) == doctest::Approx(-hfei(y, x, 2)).epsilon(1e-15));
  CHECK(hfei(Tensor({8, 8}, 0.5), checkerboard(8, 8, 0.0, 1.0), 1) < 0.0);
  CHECK_THROWS_AS(hfei(Tensor({1, 8, 8}), y.reshaped({4, 8, 4}), 1), InvalidArgument);
  CHECK_THROWS_AS(hfei(Tensor({1, 8, 8}), Tensor({1, 8, 8}, 1.0), 1), UndefinedMetric);
}

TEST_CASE("WQS identities") {
  std::mt19937_64 gen(4);
  const Tensor x = random_tensor(gen, {1, 32, 32}, 0.0, 1.0);
  CHECK(wqs(x, x) == 1.0);
  CHECK(wqs(-1.0 * x + Tensor({1, 32, 32}, 1.0), x) < 1.0);
  CHECK(wqs(-1.0 * x, x) < 1.0);
  CHECK_THROWS_AS(wqs(Tensor({1, 12, 12}), Tensor({1, 12, 12})), InvalidArgument);

  WqsConfig bad;
  bad.weights = {0.5, 0.5};
  CHECK_THROWS_AS(wqs(x, x, bad), InvalidArgument);
}

TEST_CASE("WQS matches the straight-line oracle") {
  std::mt19937_64 gen(5);
  for (std::size_t depth : {1, 2, 3}) {
    const Tensor a = random_tensor(gen, {1, 32, 32}, 0.0, 1.0);
    Tensor b = a;
    for (double& v : b.data()) v = std::clamp(v + 0.1 * std::uniform_real_distribution<>(-1, 1)(gen), 0.0, 1.0);
    WqsConfig cfg;
    cfg.depth = depth;
    CHECK(std::abs(wqs(b, a, cfg) - oracle::wqs(to_plane(b), to_plane(a), depth, 0.1)) < 1e-9);
  }
}

TEST_CASE("MS-SSIM identities and oracle") {
  std::mt19937_64 gen(6);
  const Tensor a = random_tensor(gen, {3, 32, 32}, 0.0, 1.0);
  CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-15));

  const Tensor x = random_tensor(gen, {1, 32, 32}, 0.0, 1.0);
  const Tensor y = random_tensor(gen, {1, 32, 32}, 0.0, 1.0);
  const double v = ms_ssim(x, y);
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);
  CHECK(std::abs(v - oracle::ms_ssim(to_plane(x), to_plane(y))) < 1e-9);

  CHECK(ms_ssim_scales(8) == 1);
  CHECK(ms_ssim_scales(31) == 2);
  CHECK(ms_ssim_scales(32) == 3);
  CHECK(ms_ssim_scales(1024) == 5);
  CHECK_THROWS_AS(ms_ssim(Tensor({1, 6, 6}), Tensor({1, 6, 6})), InvalidArgument);
}

// Reference values from tests/oracles/metrics_reference.py.
TEST_CASE("WQS and MS-SSIM match the NumPy reference on closed-form pairs") {
  for (int kind = 0; kind < 3; ++kind) {
    const oracle::Pair p = oracle::reference_pair(kind);
    const Tensor g = to_tensor(p.gen), r = to_tensor(p.real);
    CHECK(std::abs(wqs(g, r) - oracle::kReferenceWqs[kind]) < 1e-9);
    CHECK(std::abs(ms_ssim(g, r) - oracle::kReferenceMsSsim[kind]) < 1e-9);
  }
}

TEST_CASE("GLCM") {
  const GlcmStats flat = glcm_stats(Tensor({1, 8, 8}, 0.5));
  CHECK(flat.contrast == 0.0);
  CHECK(flat.energy == 1.0);
  CHECK(flat.homogeneity == 1.0);

  // {0, 63} checkerboard: axis offsets always cross levels, diagonals never.
  const Tensor cb = checkerboard(8, 8, 0.0, 1.0);
  CHECK(glcm_stats(cb, 64, {{0, 1}}).contrast == 63.0 * 63.0);
  CHECK(glcm_stats(cb, 64, {{1, 1}}).contrast == 0.0);
  CHECK(glcm_stats(cb).contrast == doctest::Approx(2.0 * 63.0 * 63.0 / 4.0).epsilon(1e-15));

  std::mt19937_64 gen(7);
  const Tensor img = random_tensor(gen, {3, 9, 11}, 0.0, 1.0);
  const std::vector<double> p = glcm_matrix(img);
  double total = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      CHECK(p[static_cast<std::size_t>(i * 64 + j)] == p[static_cast<std::size_t>(j * 64 + i)]);
      total += p[static_cast<std::size_t>(i * 64 + j)];
    }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<int> q = glcm_quantize(img, 64);
  std::vector<std::vector<int>> grid(9, std::vector<int>(11));
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 11; ++j) grid[i][j] = q[i * 11 + j];
  CHECK(glcm_stats(img).contrast == doctest::Approx(oracle::glcm_contrast(grid, kDefaultGlcmOffsets)).epsilon(1e-12));

  CHECK(glcm_quantize(Tensor({1, 1, 2}, std::vector<double>{1.0, 0.0}), 64) == std::vector<int>{63, 0});
  CHECK_THROWS_AS(glcm_matrix(Tensor({1, 1, 1}, 0.5)), InvalidArgument);
}

TEST_CASE("directory evaluation") {
  std::mt19937_64 gen(8);
  TempDir dir("metrics");
  std::filesystem::create_directories(dir / "gen");
  std::filesystem::create_directories(dir / "real");
  std::vector<Tensor> gens, reals;
  for (const char* name : {"b.lwt", "a.lwt"}) {
    gens.push_back(random_tensor(gen, {1, 16, 16}, 0.1, 0.9));
    reals.push_back(random_tensor(gen, {1, 16, 16}, 0.1, 0.9));
    for (Tensor* t : {&gens.back(), &reals.back()})
      for (double& v : t->data()) v = static_cast<double>(static_cast<float>(v));
    io::write_lwt(dir / "gen" / name, gens.back());
    io::write_lwt(dir / "real" / name, reals.back());
  }
  WqsConfig cfg;
  cfg.depth = 2;
  const MetricReport same = evaluate_dirs(dir / "real", dir / "real", cfg);
  CHECK(same.rdr == 0.0);
  CHECK(same.wqs == 1.0);
  CHECK(same.hfei == 0.0);
  CHECK(same.ms_ssim == doctest::Approx(1.0).epsilon(1e-15));

  const MetricReport both = evaluate_dirs(dir / "gen", dir / "real", cfg);
  const MetricReport a = evaluate_pair(gens[1], reals[1], cfg);
  const MetricReport b = evaluate_pair(gens[0], reals[0], cfg);
  CHECK(both.wqs == doctest::Approx((a.wqs + b.wqs) / 2).epsilon(1e-14));
  CHECK(both.glcm_contrast == doctest::Approx((a.glcm_contrast + b.glcm_contrast) / 2).epsilon(1e-14));

  std::filesystem::create_directories(dir / "single_gen");
  std::filesystem::create_directories(dir / "single_real");
  io::write_lwt(dir / "single_gen" / "x.lwt", gens[0]);
  io::write_lwt(dir / "single_real" / "x.lwt", reals[0]);
  const MetricReport single = evaluate_dirs(dir / "single_gen", dir / "single_real", cfg);
  CHECK(metric_report_to_json(single) == metric_report_to_json(b));

  io::write_lwt(dir / "gen" / "extra.lwt", gens[0]);
  try {
    evaluate_dirs(dir / "gen", dir / "real", cfg);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("extra.lwt") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate_dirs(dir / "nope", dir / "real", cfg), FormatError);
}
