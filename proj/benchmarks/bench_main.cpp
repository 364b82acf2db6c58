#include <benchmark/benchmark.h>

#include "bnslab/bnslab.hpp"

using namespace bnslab;

namespace {

NoiseSchedule default_schedule() { return build_linear_schedule(1000, 1e-4, 0.02); }

void BM_GaussianSampling(benchmark::State& state) {
  const NoiseSchedule s = default_schedule();
  const ScoreField f = ScoreField::gaussian(GaussianSpec::isotropic(1, 4.0));
  const auto dyn = state.range(1) == 0 ? Dynamics::stochastic : Dynamics::ode;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(f, s, SamplerConfig::boost_skip(2.0, 500, n, 1, dyn)).points.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 500);
}
BENCHMARK(BM_GaussianSampling)->Args({10000, 0})->Args({10000, 1})->Unit(benchmark::kMillisecond);

void BM_MixtureSampling(benchmark::State& state) {
  const NoiseSchedule s = default_schedule();
  const ScoreField f = ScoreField::mixture(circles_ring_mixture(CirclesSpec{}, static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(f, s, SamplerConfig::standard(1000, 2)).points.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000 * 1000);
}
BENCHMARK(BM_MixtureSampling)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_NetSampling(benchmark::State& state) {
  const NoiseSchedule s = default_schedule();
  const ScoreField f = ScoreField::network(MlpScoreNet::initialize(2, {256, 256, 256}, 3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(f, s, SamplerConfig::boost_skip(2.0, 700, 1000, 4)).points.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000 * 300);
}
BENCHMARK(BM_NetSampling)->Unit(benchmark::kMillisecond);

void BM_MlpForward(benchmark::State& state) {
  const MlpScoreNet net = MlpScoreNet::initialize(2, {256, 256, 256}, 5);
  const Mat input = Mat::Random(3, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(input).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(256)->Arg(4096);

void BM_MlpTrainStep(benchmark::State& state) {
  const MlpScoreNet net = MlpScoreNet::initialize(2, {256, 256, 256}, 6);
  const Mat input = Mat::Random(3, 256);
  const Mat target = Mat::Random(2, 256);
  MlpScoreNet::Gradient grad;
  for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradient(input, target, grad));
}
BENCHMARK(BM_MlpTrainStep);

void BM_BandEnergy(benchmark::State& state) {
  RngStream rng(7, 0);
  const int side = static_cast<int>(state.range(0));
  const NoiseField nf = draw_noise_field(side, side, 2.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(band_energy(nf, side / 8.0).low);
}
BENCHMARK(BM_BandEnergy)->Arg(32)->Arg(256);

void BM_Lof(benchmark::State& state) {
  RngStream rng(8, 0);
  Mat pts(state.range(0), 2);
  for (Eigen::Index k = 0; k < pts.size(); ++k) pts.data()[k] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(lof_self(pts, 20).values.data());
}
BENCHMARK(BM_Lof)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
