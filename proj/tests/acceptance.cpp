// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is non-zero if any criterion fails. Pass criterion numbers as
// arguments to run a subset.

#include "oracles.hpp"

#include "wtf/datagen.hpp"
#include "wtf/entropy.hpp"
#include "wtf/error.hpp"
#include "wtf/io.hpp"
#include "wtf/ot.hpp"
#include "wtf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

using namespace wtf;
using wtf::testing::random_matrix;
using wtf::testing::random_tensor;

namespace {

// Pinned tolerances.
constexpr double kConjugateTol = 1e-3;
constexpr int kGridSteps = 200;  // simplex grid step 0.005
constexpr double kLimitLambda = 1e5;
constexpr double kLimitTol = 1e-3;
constexpr double kGradientTol = 1e-5;
constexpr double kFdStep = 1e-6;
constexpr double kKernelTol = 1e-12;
constexpr double kBlockSlack = 1e-8;
constexpr double kSweepSlack = 1e-6;
constexpr double kConstraintTol = 1e-12;
constexpr double kWnmfTol = 1e-8;
constexpr double kAtomTvTol = 0.15;
constexpr double kProjectionTol = 1e-6;

constexpr double kMinute = 60.0;
constexpr double kRecoveryBudget = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Worst constraint violation and smallest entry over every recovered block
// produced by the other criteria.
struct ConstraintLedger {
  double worst_violation = 0.0;
  double smallest_entry = std::numeric_limits<double>::infinity();
  std::size_t blocks = 0;

  void record(const DenseTensor& block, Constraint c) {
    worst_violation = std::max(worst_violation, constraint_violation(block, c));
    smallest_entry = std::min(smallest_entry, block.vec().minCoeff());
    ++blocks;
  }
  void record(const Matrix& block, Constraint c) { record(DenseTensor::from_matrix(block), c); }
  void record(const TuckerModel& m) {
    for (std::size_t k = 0; k < m.order(); ++k) record(m.factors[k], m.factor_constraints[k]);
    if (!m.core_fixed) record(m.core, m.core_constraint);
  }
};

ConstraintLedger ledger;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

DenseTensor random_simplex(const Shape& shape, Rng& rng) {
  DenseTensor t = random_tensor(shape, rng, 0.05, 1.0);
  t.vec() /= t.sum();
  return t;
}

std::vector<Matrix> grid_costs(const Shape& shape) {
  std::vector<Matrix> costs;
  for (auto n : shape) costs.push_back(build_grid_cost(n, 0.0, 1.0, 2.0, true));
  return costs;
}

// 1. Conjugate values against brute-force suprema over the simplex grid.
Outcome conjugate_oracle() {
  Rng rng(101);
  double worst_balanced = 0.0;
  double worst_semi = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const GibbsKernel k = gibbs_kernel({random_matrix(3, 3, rng)}, 0.5);
    const DenseTensor alpha = random_simplex({3}, rng);
    const DenseTensor u = random_tensor({3}, rng, -1.0, 1.0);
    worst_balanced = std::max(worst_balanced,
                              std::abs(ot_conjugate_balanced(alpha, u, k).value -
                                       wtf::testing::balanced_conjugate_by_grid(alpha, u, k, kGridSteps)));
    const DenseTensor us = random_tensor({3}, rng, -1.0, 0.5);
    worst_semi = std::max(worst_semi,
                          std::abs(ot_conjugate_semiunbalanced(alpha, us, k, 1.0).value -
                                   wtf::testing::semiunbalanced_conjugate_by_search(alpha, us, k, 1.0)));
  }
  return {worst_balanced <= kConjugateTol && worst_semi <= kConjugateTol,
          fmt("max |err| balanced %.2e, semi-unbalanced %.2e (tol %.0e)", worst_balanced, worst_semi, kConjugateTol)};
}

// 2. Semi-unbalanced conjugate tends to the balanced one as lambda grows.
Outcome balanced_limit() {
  Rng rng(102);
  double worst_value = 0.0;
  double worst_grad = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Shape shape = trial % 2 == 0 ? Shape{4, 3} : Shape{5};
    const GibbsKernel k = gibbs_kernel(grid_costs(shape), 0.5);
    const DenseTensor alpha = random_simplex(shape, rng);
    const DenseTensor u = random_tensor(shape, rng, -1.0, 1.0);
    const auto b = ot_conjugate_balanced(alpha, u, k);
    const auto s = ot_conjugate_semiunbalanced(alpha, u, k, kLimitLambda);
    worst_value = std::max(worst_value, std::abs(b.value - s.value));
    worst_grad = std::max(worst_grad, (b.grad.vec() - s.grad.vec()).lpNorm<Eigen::Infinity>());
  }
  return {worst_value <= kLimitTol && worst_grad <= kLimitTol,
          fmt("lambda=1e5: max |value diff| %.2e, max grad sup-diff %.2e (tol %.0e)", worst_value, worst_grad, kLimitTol)};
}

// 3. Analytic gradients against central differences.
Outcome gradient_suites() {
  Rng rng(103);
  const Shape shape{4, 3, 3};
  const std::vector<std::size_t> ranks{2, 2, 2};
  double worst = 0.0;
  std::string where;
  auto check = [&](const std::string& name, const std::function<double(const DenseTensor&)>& f,
                   const DenseTensor& at, const DenseTensor& grad) {
    const double e = wtf::testing::gradient_error(f, at, grad, kFdStep);
    if (e > worst) {
      worst = e;
      where = name;
    }
  };

  const GibbsKernel k = gibbs_kernel(grid_costs(shape), 0.5);
  const DenseTensor alpha = random_simplex(shape, rng);
  const DenseTensor u = random_tensor(shape, rng, -0.5, 0.5);
  check("balanced conjugate", [&](const DenseTensor& v) { return ot_conjugate_balanced(alpha, v, k).value; }, u,
        ot_conjugate_balanced(alpha, u, k).grad);
  check("semi-unbalanced conjugate",
        [&](const DenseTensor& v) { return ot_conjugate_semiunbalanced(alpha, v, k, 2.0).value; }, u,
        ot_conjugate_semiunbalanced(alpha, u, k, 2.0).grad);

  for (Constraint c : {Constraint::Unconstrained, Constraint::FullSimplex, Constraint::RowSimplex,
                       Constraint::ColumnSimplex}) {
    const bool matrix_only = c == Constraint::RowSimplex || c == Constraint::ColumnSimplex;
    const DenseTensor v = matrix_only ? random_tensor({4, 2}, rng, -1.0, 1.0) : random_tensor(shape, rng, -1.0, 1.0);
    check("entropy conjugate " + std::string(to_string(c)), [&](const DenseTensor& w) { return entropy_conjugate(w, c).value; }, v,
          entropy_conjugate(v, c).grad);
  }

  const DenseTensor x = random_tensor(shape, rng, 0.1, 1.0);
  for (double lambda : {kBalanced, 3.0}) {
    SolverConfig cfg;
    cfg.model.format = Format::Tucker;
    cfg.model.ranks = ranks;
    cfg.model.factor_constraints = {Constraint::ColumnSimplex};
    cfg.loss.lambda = lambda;
    cfg.loss.kernel = k;
    cfg.rho = {0.1};
    TuckerModel m = initialize(x, cfg);
    m.core = random_tensor({2, 2, 2}, rng, 0.1, 1.0);
    for (auto& a : m.factors) a = random_matrix(static_cast<std::size_t>(a.rows()), 2, rng, 0.1, 1.0);
    const DenseTensor w = random_tensor(shape, rng, -0.5, 0.5);
    const std::string tag = lambda == kBalanced ? " (balanced)" : " (lambda=3)";
    for (std::size_t mode = 0; mode < 3; ++mode) {
      check("factor dual " + std::to_string(mode + 1) + tag,
            [&](const DenseTensor& v) { return factor_dual_objective(v, mode, x, m, cfg).value; }, w,
            factor_dual_objective(w, mode, x, m, cfg).grad);
    }
    check("core dual" + tag, [&](const DenseTensor& v) { return core_dual_objective(v, x, m, cfg).value; }, w,
          core_dual_objective(w, x, m, cfg).grad);
  }
  return {worst < kGradientTol, "worst relative error " + fmt("%.2e", worst) + " at " + where + " (tol 1e-5)"};
}

// 4. Factored log-kernel application against the explicit 2d-mode kernel.
Outcome kernel_factorisation() {
  Rng rng(104);
  const std::vector<Shape> shapes{{1}, {2}, {3}, {2, 3}, {3, 3}, {1, 2, 3}, {3, 1, 2}, {2, 2, 2}, {3, 3, 2}, {3, 3, 3}};
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Shape& shape = shapes[static_cast<std::size_t>(trial) % shapes.size()];
    std::vector<Matrix> costs;
    for (auto n : shape) costs.push_back(random_matrix(n, n, rng, 0.0, 2.0));
    const double eps = rng.uniform(0.05, 1.0);
    const GibbsKernel k = gibbs_kernel(costs, eps);
    const DenseTensor log_t = random_tensor(shape, rng, -3.0, 3.0);
    for (bool transpose : {false, true}) {
      const DenseTensor got = k.apply_log(log_t, transpose);
      const DenseTensor want = wtf::testing::dense_kernel_apply_log(costs, eps, log_t, transpose);
      for (std::size_t i = 0; i < got.size(); ++i) {
        worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
      }
    }
  }
  return {worst <= kKernelTol, fmt("max relative deviation %.2e over 20 cases (tol 1e-12)", worst)};
}

// 5. Every block solve decreases its subproblem and sweeps never go up.
Outcome duality_monotonicity() {
  Rng rng(105);
  const Shape shape{8, 8, 8};
  const DenseTensor x = random_tensor(shape, rng, 0.05, 1.0);
  SolverConfig cfg;
  cfg.model.format = Format::Tucker;
  cfg.model.ranks = {3};
  cfg.model.factor_constraints = {Constraint::ColumnSimplex};
  cfg.loss.lambda = 5.0;
  cfg.loss.kernel = gibbs_kernel(grid_costs(shape), 0.1);
  cfg.rho = {0.05};
  cfg.outer_iters = 15;
  cfg.outer_tol = 1e-10;
  cfg.inner.grad_tol = 1e-10;
  cfg.inner.max_iters = 20000;
  cfg.monitor.sinkhorn = {1e-12, 200000};
  cfg.monitor.per_block = true;
  const auto r = block_coordinate_descent(x, cfg);
  ledger.record(r.model);

  // With per-block monitoring each record holds the smoothed objective after
  // that block; all other blocks are unchanged, so the step in the smoothed
  // objective is exactly the step in the block's primal subproblem.
  double worst_block = -std::numeric_limits<double>::infinity();
  double worst_sweep = -std::numeric_limits<double>::infinity();
  double prev = r.trace.initial_objective;
  double sweep_start = prev;
  std::size_t unconverged = 0;
  for (std::size_t i = 0; i < r.trace.records.size(); ++i) {
    const auto& rec = r.trace.records[i];
    if (rec.status != InnerStatus::Converged) ++unconverged;
    worst_block = std::max(worst_block, rec.primal_objective - prev);
    prev = rec.primal_objective;
    const bool sweep_end = i + 1 == r.trace.records.size() || r.trace.records[i + 1].sweep != rec.sweep;
    if (sweep_end) {
      worst_sweep = std::max(worst_sweep, rec.primal_objective - sweep_start);
      sweep_start = rec.primal_objective;
    }
  }
  const bool pass = worst_block <= kBlockSlack && worst_sweep <= kSweepSlack && unconverged == 0 &&
                    std::isfinite(r.trace.initial_objective);
  return {pass, fmt("%.0f block solves, largest block increase %.2e (slack 1e-8), largest sweep increase %.2e (slack 1e-6)",
                    static_cast<double>(r.trace.records.size()), worst_block, worst_sweep) +
                    ", unconverged inner solves " + std::to_string(unconverged)};
}

// 7. Tensor path with d = 2 and a fixed identity core against a direct
// Wasserstein NMF implementation, one sweep from the same start.
Outcome wnmf_equivalence() {
  Rng rng(107);
  const std::size_t n = 8;
  const std::size_t m = 6;
  wtf::testing::WnmfProblem p;
  p.x = random_matrix(n, m, rng, 0.05, 1.0);
  p.cost = build_grid_cost(n, 0.0, 1.0, 2.0, true);
  p.eps = 0.2;
  p.lambda = 1.0;
  p.rho_dictionary = 0.05;
  p.rho_weights = 0.05;

  SolverConfig cfg;
  cfg.model.format = Format::CP;
  cfg.model.ranks = {3};
  cfg.model.factor_constraints = {Constraint::ColumnSimplex};
  cfg.loss.mode = LossMode::SliceSum;
  cfg.loss.slice_axis = 1;
  cfg.loss.lambda = p.lambda;
  cfg.loss.kernel = gibbs_kernel({p.cost}, p.eps);
  cfg.rho = {p.rho_dictionary};
  cfg.outer_iters = 1;
  cfg.inner.grad_tol = 1e-12;
  cfg.inner.max_iters = 50000;
  cfg.monitor.sinkhorn = {1e-10, 100000};

  const DenseTensor x = DenseTensor::from_matrix(p.x);
  const TuckerModel init = random_init(x, cfg.model, 7);
  const auto r = block_coordinate_descent(x, cfg, init);
  ledger.record(r.model);

  const Matrix d = wtf::testing::wnmf_update_dictionary(p, init.factors[1].transpose(), cfg.inner);
  const Matrix lambda = wtf::testing::wnmf_update_weights(p, d, cfg.inner);
  const double err = std::max((r.model.factors[0] - d).lpNorm<Eigen::Infinity>(),
                              (r.model.factors[1] - lambda.transpose()).lpNorm<Eigen::Infinity>());
  const bool same_sweep = r.sweeps == 1 && r.trace.records.size() == 2;
  return {same_sweep && err <= kWnmfTol, fmt("max factor deviation %.2e after one sweep (tol 1e-8)", err)};
}

// 8. Scaled recovery experiment: n = 32 grid, rank 3 mixture, 20000 samples.
constexpr std::uint64_t kRecoverySeed = 1;
constexpr std::size_t kRecoveryInnerIters = 300;
constexpr std::size_t kRecoveryMonitorIters = 300;

Outcome scaled_recovery() {
  DatasetSpec data;
  data.n = 32;
  data.samples = 20000;
  data.seed = kRecoverySeed;
  const Dataset ds = generate_dataset(data);

  RunConfig run;
  run.loss.epsilon = 0.01;
  run.loss.lambda = 25.0;
  run.solver.model.format = Format::CP;
  run.solver.model.ranks = {3};
  run.solver.model.factor_constraints = {Constraint::ColumnSimplex};
  run.solver.rho = {1e-3};
  run.solver.outer_iters = 30;
  run.solver.outer_tol = 1e-4;
  run.solver.inner.max_iters = kRecoveryInnerIters;
  run.solver.monitor.sinkhorn = {1e-6, kRecoveryMonitorIters};
  run.solver.monitor.per_block = false;
  const SolverConfig cfg = solver_config(run, ds.tensor.shape());

  const auto t0 = std::chrono::steady_clock::now();
  const auto r = block_coordinate_descent(ds.tensor, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ledger.record(r.model);

  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, atom_match_score(r.model.factors[k], ds.truth[k]).worst());
  const bool pass = r.converged && worst <= kAtomTvTol && seconds <= kRecoveryBudget;
  return {pass, fmt("worst matched atom TV %.3f (tol 0.15), %.0f s (budget 600 s), ", worst, seconds) +
                    std::to_string(r.sweeps) + " sweeps, " + (r.converged ? "converged" : "not converged")};
}

// 9. Projection onto a fixed basis is unique.
Outcome projection_uniqueness() {
  Rng rng(109);
  const Shape shape{6, 5, 5};
  const DenseTensor x = random_tensor(shape, rng, 0.05, 1.0);
  SolverConfig cfg;
  cfg.model.format = Format::CP;
  cfg.model.ranks = {3};
  cfg.model.factor_constraints = {Constraint::ColumnSimplex};
  cfg.loss.lambda = 2.0;
  cfg.loss.kernel = gibbs_kernel(grid_costs(shape), 0.2);
  cfg.rho = {0.05};
  cfg.outer_iters = 5;
  cfg.inner.grad_tol = 1e-11;
  cfg.inner.max_iters = 20000;
  const auto fit = block_coordinate_descent(x, cfg);

  const DenseTensor x_new = random_tensor(shape, rng, 0.05, 1.0);
  std::vector<Matrix> blocks;
  bool all_converged = true;
  for (int start = 0; start < 5; ++start) {
    const DenseTensor u0 = random_tensor(shape, rng, -1.0, 1.0);
    const auto p = project_onto_basis(x_new, fit.model, 0, cfg, &u0);
    all_converged = all_converged && p.inner.converged();
    ledger.record(p.block, Constraint::ColumnSimplex);
    blocks.push_back(p.block);
  }
  double spread = 0.0;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    spread = std::max(spread, (blocks[i] - blocks[0]).lpNorm<Eigen::Infinity>());
  }
  return {all_converged && spread <= kProjectionTol,
          fmt("max deviation across 5 random dual starts %.2e (tol 1e-6)", spread)};
}

// 6. Recovered blocks from every criterion above, plus direct recoveries.
Outcome constraint_exactness() {
  Rng rng(106);
  for (int trial = 0; trial < 20; ++trial) {
    for (Constraint c : {Constraint::Unconstrained, Constraint::FullSimplex, Constraint::RowSimplex,
                         Constraint::ColumnSimplex}) {
      ledger.record(primal_recover(random_tensor({5, 4}, rng, -40.0, 40.0), c), c);
    }
  }
  const bool pass = ledger.worst_violation <= kConstraintTol && ledger.smallest_entry > 0.0;
  return {pass, fmt("%.0f blocks, worst violation %.2e (tol 1e-12), smallest entry %.2e",
                    static_cast<double>(ledger.blocks), ledger.worst_violation, ledger.smallest_entry)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 when no runtime target applies
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  // Criterion 6 audits blocks produced by the others, so it runs last.
  const std::vector<Criterion> criteria{
      {1, "conjugate oracle equivalence", kMinute, conjugate_oracle},
      {2, "balanced limit", 0.0, balanced_limit},
      {3, "gradient suites", kMinute, gradient_suites},
      {4, "kernel factorisation", 0.0, kernel_factorisation},
      {5, "duality monotonicity", 0.0, duality_monotonicity},
      {7, "WNMF equivalence", 0.0, wnmf_equivalence},
      {8, "scaled mixture recovery", 0.0, scaled_recovery},
      {9, "projection uniqueness", 0.0, projection_uniqueness},
      {6, "constraint exactness", 0.0, constraint_exactness},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only.count(c.id) == 0) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over time budget: %.1f s > %.0f s]", seconds, c.budget_seconds);
    }
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
