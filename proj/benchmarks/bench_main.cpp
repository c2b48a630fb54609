// Microbenchmarks of the primitives the solve cost is made of: the
// matrix-free kernel action (per apply and per row), dense assembly for
// contrast, preconditioner setup and application, and PCG iterations.
//
// Run all:      steinpcg_bench
// Run a subset: steinpcg_bench --benchmark_filter=Action

#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "stein/jacobi.hpp"
#include "stein/kernel_action.hpp"
#include "stein/low_rank.hpp"
#include "stein/rng.hpp"
#include "stein/sample_set.hpp"
#include "stein/solver.hpp"
#include "stein/stein_kernel.hpp"
#include "stein/target.hpp"

namespace {

constexpr int kDim = 4;
constexpr double kLengthScale = 1.0;

stein::SampleSet gaussian_bed(Eigen::Index nodes) {
  const stein::StdGaussianTarget target(kDim);
  stein::Rng rng(42);
  return stein::SampleSet::from_states(target, rng.normal_matrix(nodes, kDim));
}

stein::SteinKernel bed_kernel() {
  return stein::SteinKernel(stein::BaseKernel(stein::make_profile("imq"), kLengthScale));
}

void BM_ActionApply(benchmark::State& state) {
  const auto nodes = static_cast<Eigen::Index>(state.range(0));
  const stein::SampleSet samples = gaussian_bed(nodes);
  const stein::KernelAction action(samples, bed_kernel());
  const Eigen::VectorXd v = stein::Rng(7).normal_vector(nodes);
  for (auto _ : state) {
    benchmark::DoNotOptimize(action.apply(v));
  }
  state.SetItemsProcessed(state.iterations() * nodes * nodes);
}
BENCHMARK(BM_ActionApply)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ActionRow(benchmark::State& state) {
  const auto nodes = static_cast<Eigen::Index>(state.range(0));
  const stein::SampleSet samples = gaussian_bed(nodes);
  const stein::KernelAction action(samples, bed_kernel());
  Eigen::Index i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(action.row(i));
    i = (i + 1) % nodes;
  }
}
BENCHMARK(BM_ActionRow)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_DenseAssembly(benchmark::State& state) {
  const auto nodes = static_cast<Eigen::Index>(state.range(0));
  const stein::SampleSet samples = gaussian_bed(nodes);
  const stein::SteinKernel kernel = bed_kernel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stein::assemble_dense(kernel, samples));
  }
}
BENCHMARK(BM_DenseAssembly)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_NystromSetup(benchmark::State& state) {
  const stein::SampleSet samples = gaussian_bed(512);
  const stein::KernelAction action(samples, bed_kernel());
  const auto inducing = static_cast<Eigen::Index>(state.range(0));
  for (auto _ : state) {
    const stein::NystromPreconditioner p(action, inducing, 1e-2,
                                         stein::NystromSampling::uniform, 17);
    benchmark::DoNotOptimize(&p);
  }
}
BENCHMARK(BM_NystromSetup)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RandSvdSetup(benchmark::State& state) {
  const stein::SampleSet samples = gaussian_bed(512);
  const stein::KernelAction action(samples, bed_kernel());
  const auto sketch = static_cast<Eigen::Index>(state.range(0));
  for (auto _ : state) {
    const stein::RandomizedSvdPreconditioner p(action, sketch, 1e-2, 17);
    benchmark::DoNotOptimize(&p);
  }
}
BENCHMARK(BM_RandSvdSetup)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_NystromApplyInverse(benchmark::State& state) {
  const stein::SampleSet samples = gaussian_bed(1024);
  const stein::KernelAction action(samples, bed_kernel());
  const stein::NystromPreconditioner p(action, 64, 1e-2, stein::NystromSampling::uniform, 17);
  const Eigen::VectorXd v = stein::Rng(7).normal_vector(1024);
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.apply_inverse(v));
  }
}
BENCHMARK(BM_NystromApplyInverse)->Unit(benchmark::kMicrosecond);

void BM_PcgIterations(benchmark::State& state) {
  const auto nodes = static_cast<Eigen::Index>(state.range(0));
  const stein::SampleSet samples = gaussian_bed(nodes);
  const stein::KernelAction action(samples, bed_kernel());
  const stein::BlockJacobiPreconditioner jacobi(action, 1);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(nodes);
  stein::SolveConfig config;
  config.criterion = stein::FixedIterationsCriterion{};
  config.max_iterations = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stein::pcg(action, jacobi, rhs, config));
  }
  state.SetItemsProcessed(state.iterations() * config.max_iterations);
}
BENCHMARK(BM_PcgIterations)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
