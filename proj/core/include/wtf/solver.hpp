#pragma once

#include "wtf/entropy.hpp"
#include "wtf/optimize.hpp"
#include "wtf/ot.hpp"
#include "wtf/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace wtf {

enum class Format { CP, Tucker };
enum class InitMethod { NNSVD, Random };

/// Non-negative Tucker model S[A^(1), ..., A^(d)]. A CP model is the Tucker
/// model with a fixed superdiagonal core of ones.
struct TuckerModel {
  DenseTensor core;
  std::vector<Matrix> factors;
  Constraint core_constraint = Constraint::FullSimplex;
  std::vector<Constraint> factor_constraints;
  bool core_fixed = false;

  [[nodiscard]] std::size_t order() const noexcept { return factors.size(); }
  [[nodiscard]] Shape data_shape() const;
  [[nodiscard]] std::vector<std::size_t> ranks() const;
  [[nodiscard]] DenseTensor reconstruct() const;
  /// Throws ShapeError on inconsistent dimensions.
  void validate() const;
};

struct ModelSpec {
  Format format = Format::CP;
  /// One entry per mode; a single entry is broadcast.
  std::vector<std::size_t> ranks;
  Constraint core_constraint = Constraint::FullSimplex;
  /// One entry per mode; a single entry is broadcast.
  std::vector<Constraint> factor_constraints;
};

struct MonitorOptions {
  SinkhornOptions sinkhorn{1e-9, 10000};
  /// Evaluate the smoothed objective after every block rather than once per sweep.
  bool per_block = true;
};

struct SolverConfig {
  ModelSpec model;
  /// Barrier weights: rho[0] for the core, rho[k + 1] for factor k. A single
  /// entry is broadcast.
  std::vector<double> rho{1e-3};
  LossSpec loss;
  std::size_t outer_iters = 100;
  double outer_tol = 1e-5;
  InnerOptions inner;
  InitMethod init = InitMethod::NNSVD;
  std::uint64_t seed = 0;
  MonitorOptions monitor;

  [[nodiscard]] double rho_core() const { return rho.size() == 1 ? rho[0] : rho.at(0); }
  [[nodiscard]] double rho_factor(std::size_t mode) const {
    return rho.size() == 1 ? rho[0] : rho.at(mode + 1);
  }
};

/// Throws ValidationError with a specific message on the first problem.
void validate_config(const SolverConfig& cfg, const Shape& data_shape);

/// Per-mode ranks and constraints with single entries broadcast.
[[nodiscard]] std::vector<std::size_t> expanded_ranks(const ModelSpec& spec, std::size_t order);
[[nodiscard]] std::vector<Constraint> expanded_constraints(const ModelSpec& spec,
                                                           std::size_t order);

// Linear maps of the dual subproblems. `factors[mode]` is never read by the
// factor-block operators, so it may be a placeholder of any size.

/// Xi^(k)(U) = [U x_{j>k} A_j^T]_(k) [S x_{j<k} A_j]_(k)^T, an n_k x r_k matrix
/// satisfying <A_k, Xi^(k)(U)> = <U, S[A]>.
[[nodiscard]] Matrix xi_operator(const DenseTensor& u, std::size_t mode, const DenseTensor& core,
                                 std::span<const Matrix> factors);
/// Adjoint of xi_operator: the reconstruction with A_k replaced by g.
[[nodiscard]] DenseTensor xi_adjoint(const Matrix& g, std::size_t mode, const DenseTensor& core,
                                     std::span<const Matrix> factors);
/// Omega(U) = U x_1 A_1^T ... x_d A_d^T.
[[nodiscard]] DenseTensor omega_operator(const DenseTensor& u, std::span<const Matrix> factors);
[[nodiscard]] DenseTensor omega_adjoint(const DenseTensor& g, std::span<const Matrix> factors);

/// Dual objective of the factor-k block: Phi*(X, U) + rho_k E*(-Xi(U)/rho_k).
[[nodiscard]] Evaluation factor_dual_objective(const DenseTensor& u, std::size_t mode,
                                               const DenseTensor& x, const TuckerModel& model,
                                               const SolverConfig& cfg);
/// Dual objective of the core block: Phi*(X, U) + rho_0 E*(-Omega(U)/rho_0).
[[nodiscard]] Evaluation core_dual_objective(const DenseTensor& u, const DenseTensor& x,
                                             const TuckerModel& model, const SolverConfig& cfg);

struct ObjectiveBreakdown {
  double loss = 0.0;
  double barrier = 0.0;
  SinkhornResult sinkhorn;
  [[nodiscard]] double total() const { return loss + barrier; }
};

/// Phi(X, S[A]) + rho_0 E(S) + sum_k rho_k E(A_k), with Phi evaluated by
/// Sinkhorn. A fixed core contributes no barrier term. For the balanced loss
/// a reconstruction whose mass is within 1e-6 (relative) of X is rescaled
/// onto the mass of X; a larger mismatch gives +inf.
[[nodiscard]] ObjectiveBreakdown smoothed_objective(const DenseTensor& x, const TuckerModel& model,
                                                    const SolverConfig& cfg);

/// Phi(X, Xhat) as monitored by the solver (see smoothed_objective for the
/// balanced mass handling).
[[nodiscard]] SinkhornResult monitored_loss(const DenseTensor& x, const DenseTensor& x_hat,
                                            const LossSpec& loss, const SinkhornOptions& options);

/// Primal objective of one block subproblem: Phi(X, S[A]) + rho_b E(block).
/// `block` is 0 for the core and k + 1 for factor k.
[[nodiscard]] double block_primal_objective(const DenseTensor& x, const TuckerModel& model,
                                            int block, const SolverConfig& cfg);

struct FactorUpdate {
  Matrix factor;
  InnerResult inner;
};

struct CoreUpdate {
  DenseTensor core;
  InnerResult inner;
};

/// Minimises the factor-k dual from `start` (zero when null) and recovers
/// A_k = primal_recover(-Xi(U*)/rho_k).
[[nodiscard]] FactorUpdate solve_factor_subproblem(std::size_t mode, const DenseTensor& x,
                                                   const TuckerModel& model,
                                                   const SolverConfig& cfg,
                                                   const DenseTensor* start = nullptr);

[[nodiscard]] CoreUpdate solve_core_subproblem(const DenseTensor& x, const TuckerModel& model,
                                               const SolverConfig& cfg,
                                               const DenseTensor* start = nullptr);

struct TraceRecord {
  std::size_t sweep = 0;
  /// 0 for the core, k + 1 for factor k.
  int block = 0;
  std::size_t inner_iterations = 0;
  InnerStatus status = InnerStatus::Converged;
  double dual_value = 0.0;
  double grad_norm = 0.0;
  /// Smoothed objective after the block update; NaN when not monitored.
  double primal_objective = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

[[nodiscard]] std::string block_label(int block);

struct SolveTrace {
  double initial_objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<TraceRecord> records;
};

struct DecompositionResult {
  TuckerModel model;
  SolveTrace trace;
  std::size_t sweeps = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  /// Stopped on outer_tol (or outer_iters == 0).
  bool converged = false;
  /// Some inner solve of the final sweep did not converge.
  bool inner_flagged = false;
};

/// Cyclic block coordinate descent over A_1..A_d then S (unless fixed).
[[nodiscard]] DecompositionResult block_coordinate_descent(const DenseTensor& x,
                                                           const SolverConfig& cfg);
[[nodiscard]] DecompositionResult block_coordinate_descent(const DenseTensor& x,
                                                           const SolverConfig& cfg,
                                                           TuckerModel initial);

/// Deterministic NNDSVD start: each factor from the leading singular pairs
/// of the mode unfolding, negative parts dropped, zeros floored at mean(X)/100,
/// then projected onto its constraint. The core is uniform (CP: fixed
/// superdiagonal) and scaled to the mass of X before projection.
[[nodiscard]] TuckerModel nnsvd_init(const DenseTensor& x, const ModelSpec& spec);

/// Uniform(0.1, 1) factors and core, projected onto the constraints.
[[nodiscard]] TuckerModel random_init(const DenseTensor& x, const ModelSpec& spec,
                                      std::uint64_t seed);

[[nodiscard]] TuckerModel initialize(const DenseTensor& x, const SolverConfig& cfg);

struct Projection {
  Matrix block;
  InnerResult inner;
};

/// Solves the factor-`mode` subproblem for new data while every other block
/// of `basis` stays fixed. The size of basis.factors[mode] is irrelevant.
[[nodiscard]] Projection project_onto_basis(const DenseTensor& x_new, const TuckerModel& basis,
                                            std::size_t mode, const SolverConfig& cfg,
                                            const DenseTensor* start = nullptr);

}  // namespace wtf
