#include <benchmark/benchmark.h>

#include <memory>

#include "krc/pipeline.hpp"

using namespace krc;

namespace {

SquaredExponentialKernel bench_kernel() {
  return SquaredExponentialKernel(KernelSpec(0.5, 5.0, 2));
}

Dataset random_dataset(Eigen::Index n, std::uint64_t seed) {
  UniformSampler rng(seed);
  Dataset d;
  d.inputs.resize(n, 2);
  d.targets.resize(n);
  d.noise_bound = 0.1;
  for (Eigen::Index i = 0; i < n; ++i) {
    d.inputs.row(i) =
        (Eigen::VectorXd(2) << rng.in_range(-12, 12), rng.in_range(-6, 6)).finished();
    d.targets[i] = rng.in_range(-0.1, 0.1);
  }
  return d;
}

void BM_GramMatrix(benchmark::State& state) {
  const auto kernel = bench_kernel();
  const Dataset d = random_dataset(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(kernel, d.inputs));
}
BENCHMARK(BM_GramMatrix)->Arg(50)->Arg(200);

void BM_KrrFit(benchmark::State& state) {
  const auto kernel = bench_kernel();
  const Dataset d = random_dataset(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(KrrModel::fit(kernel, d, 0.3));
}
BENCHMARK(BM_KrrFit)->Arg(50)->Arg(200);

void BM_Predict(benchmark::State& state) {
  const auto kernel = bench_kernel();
  const KrrModel model = KrrModel::fit(kernel, random_dataset(state.range(0), 3), 0.3);
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 1.0, -2.0).finished();
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x));
}
BENCHMARK(BM_Predict)->Arg(50)->Arg(200);

void BM_PowerQuery(benchmark::State& state) {
  const auto kernel = bench_kernel();
  const KrrModel model = KrrModel::fit(kernel, random_dataset(state.range(0), 4), 0.3);
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 1.0, -2.0).finished();
  for (auto _ : state) benchmark::DoNotOptimize(model.power(x));
}
BENCHMARK(BM_PowerQuery)->Arg(50)->Arg(200);

void BM_PowerSup(benchmark::State& state) {
  const auto kernel = bench_kernel();
  const KrrModel model = KrrModel::fit(kernel, random_dataset(200, 5), 0.3);
  const Box domain((Eigen::VectorXd(2) << -12, -6).finished(),
                   (Eigen::VectorXd(2) << 12, 6).finished());
  for (auto _ : state)
    benchmark::DoNotOptimize(power_sup(model, domain, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_PowerSup)->Arg(21)->Arg(101)->Unit(benchmark::kMillisecond);

void BM_PolePlacement(benchmark::State& state) {
  const SystemMatrices m = build_matrices(state.range(0), 0.2);
  PoleSet poles;
  for (Eigen::Index i = 0; i < state.range(0); ++i)
    poles.emplace_back(0.5 + 0.04 * static_cast<double>(i), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(place_controller(m.A, m.b, poles));
}
BENCHMARK(BM_PolePlacement)->Arg(2)->Arg(4)->Arg(8);

void BM_LyapunovSolve(benchmark::State& state) {
  PoleSet ctrl, obs;
  for (Eigen::Index i = 0; i < state.range(0); ++i) {
    ctrl.emplace_back(0.6 - 0.1 * static_cast<double>(i), 0.0);
    obs.emplace_back(0.2 - 0.04 * static_cast<double>(i), 0.0);
  }
  const GainSet g = synthesize_gains(state.range(0), 0.2, ctrl, obs);
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2 * state.range(0), 2 * state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_discrete_lyapunov(g.A_tilde, Q));
}
BENCHMARK(BM_LyapunovSolve)->Arg(2)->Arg(4);

void BM_ClosedLoop200Steps(benchmark::State& state) {
  ExperimentConfig cfg = paper_config();
  auto collected = pipeline::run_collect(cfg);
  auto model = std::make_shared<KrrModel>(pipeline::train_model(cfg, collected.result.dataset));
  const GainSet gains = pipeline::make_gains(cfg);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        pipeline::simulate(cfg, gains, pipeline::Variant::with_krr, model, 0));
  state.SetItemsProcessed(state.iterations() * cfg.simulation.steps);
}
BENCHMARK(BM_ClosedLoop200Steps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
