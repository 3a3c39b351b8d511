#include "wtf/io.hpp"
#include "wtf/ot.hpp"
#include "wtf/random.hpp"
#include "wtf/solver.hpp"
#include "wtf/tensor.hpp"

#include <benchmark/benchmark.h>

namespace {

wtf::DenseTensor random_tensor(const wtf::Shape& shape, wtf::Rng& rng, double lo, double hi) {
  wtf::DenseTensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

wtf::GibbsKernel cube_kernel(std::size_t n, double eps) {
  const wtf::Matrix c = wtf::build_grid_cost(n, 0.0, 1.0, 2.0, true);
  return wtf::gibbs_kernel({c, c, c}, eps);
}

// Smooth log-input: the GEMM fast path handles every entry.
void BM_KernelApplyLogSmooth(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wtf::Rng rng(1);
  const auto k = cube_kernel(n, 0.1);
  const auto t = random_tensor({n, n, n}, rng, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(k.apply_log(t));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(t.size()));
}
BENCHMARK(BM_KernelApplyLogSmooth)->Arg(8)->Arg(16)->Arg(32);

// Wide dynamic range at small epsilon: many entries take the exact path.
void BM_KernelApplyLogStiff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wtf::Rng rng(2);
  const auto k = cube_kernel(n, 0.01);
  const auto t = random_tensor({n, n, n}, rng, -1500.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(k.apply_log(t));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(t.size()));
}
BENCHMARK(BM_KernelApplyLogStiff)->Arg(8)->Arg(16)->Arg(32);

void BM_SemiUnbalancedConjugate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wtf::Rng rng(3);
  const auto k = cube_kernel(n, 0.05);
  auto alpha = random_tensor({n, n, n}, rng, 0.0, 1.0);
  alpha.vec() /= alpha.sum();
  const auto u = random_tensor({n, n, n}, rng, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(wtf::ot_conjugate_semiunbalanced(alpha, u, k, 25.0));
}
BENCHMARK(BM_SemiUnbalancedConjugate)->Arg(8)->Arg(16)->Arg(32);

void BM_ModeProduct(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wtf::Rng rng(4);
  const auto t = random_tensor({n, n, n}, rng, 0.0, 1.0);
  wtf::Matrix b = wtf::Matrix::Random(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (auto _ : state) benchmark::DoNotOptimize(wtf::mode_product(t, b, 1));
}
BENCHMARK(BM_ModeProduct)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_FactorDual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wtf::Rng rng(5);
  auto x = random_tensor({n, n, n}, rng, 0.0, 1.0);
  x.vec() /= x.sum();
  wtf::SolverConfig cfg;
  cfg.model.ranks = {3};
  cfg.model.factor_constraints = {wtf::Constraint::ColumnSimplex};
  cfg.loss.lambda = 25.0;
  cfg.loss.kernel = cube_kernel(n, 0.05);
  const auto model = wtf::random_init(x, cfg.model, 1);
  const auto u = random_tensor({n, n, n}, rng, -0.1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(wtf::factor_dual_objective(u, 1, x, model, cfg));
}
BENCHMARK(BM_FactorDual)->Arg(8)->Arg(16)->Arg(32);

void BM_SinkhornSemiUnbalanced(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wtf::Rng rng(6);
  const auto k = cube_kernel(n, 0.1);
  auto a = random_tensor({n, n, n}, rng, 0.1, 1.0);
  auto b = random_tensor({n, n, n}, rng, 0.1, 1.0);
  a.vec() /= a.sum();
  b.vec() /= b.sum();
  for (auto _ : state) benchmark::DoNotOptimize(wtf::sinkhorn_semiunbalanced(a, b, k, 25.0, {1e-9, 100}));
}
BENCHMARK(BM_SinkhornSemiUnbalanced)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
