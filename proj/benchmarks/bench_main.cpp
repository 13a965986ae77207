#include <benchmark/benchmark.h>

#include "wavemask/masking.hpp"
#include "wavemask/metrics.hpp"
#include "wavemask/objectives.hpp"
#include "wavemask/rng.hpp"
#include "wavemask/saliency.hpp"
#include "wavemask/wavelet.hpp"

namespace {

using namespace wavemask;

Tensor uniform_tensor(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform();
  return t;
}

void BM_Dwt2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = uniform_tensor({4, n, n}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(dwt2(x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Dwt2)->Arg(32)->Arg(64)->Arg(256);

void BM_Dwt2RoundTrip(benchmark::State& state) {
  const Tensor x = uniform_tensor({4, 64, 64}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(idwt2_multi(dwt2_multi(x, 3)));
}
BENCHMARK(BM_Dwt2RoundTrip);

void BM_Saliency(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor z = uniform_tensor({4, n, n}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(saliency_from_latent(z));
}
BENCHMARK(BM_Saliency)->Arg(32)->Arg(64);

void BM_MaskedFmLoss(benchmark::State& state) {
  const Tensor z0 = uniform_tensor({4, 32, 32}, 4), eps = uniform_tensor({4, 32, 32}, 5);
  const Tensor v = uniform_tensor({4, 32, 32}, 6);
  const FlowSample s = make_flow_sample(z0, eps, 0.4);
  const BinaryMask m = mask_at(saliency_from_latent(z0).map, MaskSchedule{1000, 0.3}, 600);
  for (auto _ : state) benchmark::DoNotOptimize(masked_fm_loss(s, v, m));
}
BENCHMARK(BM_MaskedFmLoss);

void BM_MsSsim(benchmark::State& state) {
  const Tensor a = uniform_tensor({3, 64, 64}, 7), b = uniform_tensor({3, 64, 64}, 8);
  for (auto _ : state) benchmark::DoNotOptimize(ms_ssim(a, b));
}
BENCHMARK(BM_MsSsim);

void BM_Wqs(benchmark::State& state) {
  const Tensor a = uniform_tensor({3, 64, 64}, 9), b = uniform_tensor({3, 64, 64}, 10);
  for (auto _ : state) benchmark::DoNotOptimize(wqs(a, b));
}
BENCHMARK(BM_Wqs);

void BM_GlcmStats(benchmark::State& state) {
  const Tensor a = uniform_tensor({1, 64, 64}, 11);
  for (auto _ : state) benchmark::DoNotOptimize(glcm_stats(a));
}
BENCHMARK(BM_GlcmStats);

}  // namespace
BENCHMARK_MAIN();
