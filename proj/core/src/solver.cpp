#include "wtf/solver.hpp"

#include "wtf/error.hpp"
#include "wtf/random.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace wtf {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_operator_shapes(const Shape& data_shape, std::size_t mode, const DenseTensor& core,
                           std::span<const Matrix> factors, const char* what) {
  const std::size_t d = core.order();
  if (factors.size() != d || data_shape.size() != d) {
    throw ShapeError(std::string(what) + ": core, factors and data disagree on the order");
  }
  if (mode >= d) throw ShapeError(std::string(what) + ": mode out of range");
  for (std::size_t j = 0; j < d; ++j) {
    if (j == mode) continue;
    if (static_cast<std::size_t>(factors[j].rows()) != data_shape[j] ||
        static_cast<std::size_t>(factors[j].cols()) != core.dim(j)) {
      throw ShapeError(std::string(what) + ": factor " + std::to_string(j) +
                       " does not match the data and core dimensions");
    }
  }
}

std::vector<Matrix> with_factor(std::span<const Matrix> factors, std::size_t mode,
                                const Matrix& replacement) {
  std::vector<Matrix> out(factors.begin(), factors.end());
  out[mode] = replacement;
  return out;
}

double relative_change(double before, double after) {
  if (before == after) return 0.0;
  return std::abs(after - before) / std::max(std::abs(before), 1e-300);
}

// Scales the first free block so that the reconstruction carries `mass`.
void match_mass(TuckerModel& model, double mass) {
  const double current = model.reconstruct().sum();
  if (!(current > 0.0) || !(mass > 0.0)) return;
  const double scale = mass / current;
  if (!model.core_fixed && model.core_constraint == Constraint::Unconstrained) {
    model.core.vec() *= scale;
    return;
  }
  for (std::size_t k = 0; k < model.order(); ++k) {
    if (model.factor_constraints[k] == Constraint::Unconstrained) {
      model.factors[k] *= scale;
      return;
    }
  }
}

Matrix project_factor(const Matrix& a, Constraint c) {
  return project_to_constraint(DenseTensor::from_matrix(a), c).to_matrix();
}

// Exact line search along the all-ones direction before the quasi-Newton
// solve. With unequal data and model mass the optimum sits far along that
// direction and L-BFGS only creeps towards it. The slope along the line is the
// gradient sum, which is monotone, so a safeguarded secant on it suffices.
DenseTensor translate_start(const SmoothObjective& objective, DenseTensor u) {
  auto slope = [&](double t) -> std::optional<double> {
    DenseTensor v = u;
    v.vec().array() += t;
    try {
      const double s = objective(v).grad.sum();
      if (std::isfinite(s)) return s;
    } catch (const DomainViolation&) {
    }
    return std::nullopt;
  };
  const auto s0 = slope(0.0);
  if (!s0 || *s0 == 0.0) return u;
  const double dir = *s0 < 0.0 ? 1.0 : -1.0;
  // Bracket the root in [0, hi] along `dir`; an infeasible probe is treated as
  // overshooting.
  double lo = 0.0, slo = *s0 * dir;
  double hi = 1.0, shi = 0.0;
  bool bracketed = false;
  for (int k = 0; k < 60 && !bracketed; ++k) {
    const auto s = slope(dir * hi);
    if (!s || *s * dir >= 0.0) {
      shi = s ? *s * dir : std::numeric_limits<double>::infinity();
      bracketed = true;
    } else {
      lo = hi;
      slo = *s * dir;
      hi *= 2.0;
    }
  }
  if (!bracketed) return u;
  double best = lo;
  for (int k = 0; k < 60 && hi - lo > 1e-12 * std::max(1.0, hi); ++k) {
    double t = 0.5 * (lo + hi);
    if (std::isfinite(shi)) {
      const double secant = lo - slo * (hi - lo) / (shi - slo);
      if (secant > lo && secant < hi) t = secant;
      // Keep shrinking the bracket even when the secant stalls on one side.
      if (k % 3 == 2) t = 0.5 * (lo + hi);
    }
    const auto s = slope(dir * t);
    if (!s || *s * dir > 0.0) {
      hi = t;
      shi = s ? *s * dir : std::numeric_limits<double>::infinity();
    } else {
      lo = t;
      slo = *s * dir;
      best = t;
      if (slo == 0.0) break;
    }
    if (std::abs(slo) <= 1e-10 * std::abs(*s0)) break;
  }
  u.vec().array() += dir * best;
  return u;
}

TuckerModel empty_model(const DenseTensor& x, const ModelSpec& spec) {
  const std::size_t d = x.order();
  TuckerModel model;
  model.factor_constraints = expanded_constraints(spec, d);
  model.core_constraint = spec.core_constraint;
  model.core_fixed = spec.format == Format::CP;
  model.factors.resize(d);
  return model;
}

void finish_core(TuckerModel& model, const DenseTensor& x, const std::vector<std::size_t>& ranks,
                 std::uint64_t seed, bool random) {
  if (model.core_fixed) {
    model.core = superdiagonal(ranks.front(), ranks.size());
  } else {
    model.core = DenseTensor(Shape(ranks.begin(), ranks.end()), 1.0);
    if (random) {
      Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
      for (double& v : model.core.data()) v = rng.uniform(0.1, 1.0);
    }
    // Uniform start sized so that S[A] carries the mass of X.
    const double mass = model.reconstruct().sum();
    if (mass > 0.0) model.core.vec() *= x.sum() / mass;
    model.core = project_to_constraint(model.core, model.core_constraint);
  }
  match_mass(model, x.sum());
}

}  // namespace

Shape TuckerModel::data_shape() const {
  Shape s;
  for (const auto& f : factors) s.push_back(static_cast<std::size_t>(f.rows()));
  return s;
}

std::vector<std::size_t> TuckerModel::ranks() const {
  std::vector<std::size_t> r;
  for (const auto& f : factors) r.push_back(static_cast<std::size_t>(f.cols()));
  return r;
}

DenseTensor TuckerModel::reconstruct() const { return tucker_reconstruct(core, factors); }

void TuckerModel::validate() const {
  if (factors.empty()) throw ShapeError("model has no factors");
  if (core.order() != factors.size()) throw ShapeError("core order does not match factor count");
  if (factor_constraints.size() != factors.size()) {
    throw ShapeError("model needs one constraint per factor");
  }
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (static_cast<std::size_t>(factors[k].cols()) != core.dim(k)) {
      throw ShapeError("factor " + std::to_string(k) + " rank does not match the core");
    }
  }
}

std::vector<std::size_t> expanded_ranks(const ModelSpec& spec, std::size_t order) {
  if (spec.ranks.size() == 1) return std::vector<std::size_t>(order, spec.ranks.front());
  if (spec.ranks.size() != order) {
    throw ValidationError("ranks: expected 1 or " + std::to_string(order) + " entries, got " +
                          std::to_string(spec.ranks.size()));
  }
  return spec.ranks;
}

std::vector<Constraint> expanded_constraints(const ModelSpec& spec, std::size_t order) {
  if (spec.factor_constraints.empty()) return std::vector<Constraint>(order, Constraint::Unconstrained);
  if (spec.factor_constraints.size() == 1) {
    return std::vector<Constraint>(order, spec.factor_constraints.front());
  }
  if (spec.factor_constraints.size() != order) {
    throw ValidationError("factor_constraints: expected 1 or " + std::to_string(order) +
                          " entries, got " + std::to_string(spec.factor_constraints.size()));
  }
  return spec.factor_constraints;
}

void validate_config(const SolverConfig& cfg, const Shape& data_shape) {
  const std::size_t d = data_shape.size();
  if (!(cfg.loss.epsilon() > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(cfg.loss.lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (cfg.rho.size() != 1 && cfg.rho.size() != d + 1) {
    throw ValidationError("rho: expected 1 or " + std::to_string(d + 1) + " entries, got " +
                          std::to_string(cfg.rho.size()));
  }
  for (double r : cfg.rho) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("rho entries must be positive");
  }
  const auto ranks = expanded_ranks(cfg.model, d);
  for (std::size_t k = 0; k < d; ++k) {
    if (ranks[k] == 0 || ranks[k] > data_shape[k]) {
      throw ValidationError("rank " + std::to_string(ranks[k]) + " is infeasible for mode " +
                            std::to_string(k) + " of size " + std::to_string(data_shape[k]));
    }
  }
  if (cfg.model.format == Format::CP) {
    for (auto r : ranks) {
      if (r != ranks.front()) throw ValidationError("CP format needs equal ranks on every mode");
    }
  }
  const auto constraints = expanded_constraints(cfg.model, d);
  if (cfg.model.format == Format::Tucker && d != 2 &&
      (cfg.model.core_constraint == Constraint::RowSimplex ||
       cfg.model.core_constraint == Constraint::ColumnSimplex)) {
    throw ValidationError("row/column simplex core constraints need a 2-mode core");
  }
  (void)constraints;
  if (!(cfg.outer_tol > 0.0)) throw ValidationError("outer_tol must be positive");
  if (!(cfg.inner.grad_tol > 0.0)) throw ValidationError("inner grad_tol must be positive");
  if (!(cfg.monitor.sinkhorn.tol > 0.0)) throw ValidationError("monitor tol must be positive");
  validate_loss(cfg.loss, data_shape);
}

Matrix xi_operator(const DenseTensor& u, std::size_t mode, const DenseTensor& core,
                   std::span<const Matrix> factors) {
  check_operator_shapes(u.shape(), mode, core, factors, "xi_operator");
  const std::size_t d = core.order();
  DenseTensor w = u;
  for (std::size_t j = mode + 1; j < d; ++j) w = mode_product(w, factors[j].transpose(), j);
  DenseTensor m = core;
  for (std::size_t j = 0; j < mode; ++j) m = mode_product(m, factors[j], j);

  // Contract every index except `mode`; the two tensors share all other extents.
  const std::size_t nk = u.dim(mode);
  const std::size_t rk = core.dim(mode);
  std::size_t outer = 1;
  for (std::size_t j = 0; j < mode; ++j) outer *= u.dim(j);
  const std::size_t inner = w.size() / (outer * nk);
  Matrix xi = Matrix::Zero(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(rk));
  for (std::size_t o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajorMatrix> wo(w.data().data() + o * nk * inner,
                                        static_cast<Eigen::Index>(nk),
                                        static_cast<Eigen::Index>(inner));
    Eigen::Map<const RowMajorMatrix> mo(m.data().data() + o * rk * inner,
                                        static_cast<Eigen::Index>(rk),
                                        static_cast<Eigen::Index>(inner));
    xi.noalias() += wo * mo.transpose();
  }
  return xi;
}

DenseTensor xi_adjoint(const Matrix& g, std::size_t mode, const DenseTensor& core,
                       std::span<const Matrix> factors) {
  if (mode >= factors.size()) throw ShapeError("xi_adjoint: mode out of range");
  if (static_cast<std::size_t>(g.cols()) != core.dim(mode)) {
    throw ShapeError("xi_adjoint: argument has the wrong number of columns");
  }
  Shape data_shape;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    data_shape.push_back(j == mode ? static_cast<std::size_t>(g.rows())
                                   : static_cast<std::size_t>(factors[j].rows()));
  }
  check_operator_shapes(data_shape, mode, core, factors, "xi_adjoint");
  return tucker_reconstruct(core, with_factor(factors, mode, g));
}

DenseTensor omega_operator(const DenseTensor& u, std::span<const Matrix> factors) {
  if (factors.size() != u.order()) throw ShapeError("omega_operator: order mismatch");
  DenseTensor out = u;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    out = mode_product(out, factors[j].transpose(), j);
  }
  return out;
}

DenseTensor omega_adjoint(const DenseTensor& g, std::span<const Matrix> factors) {
  return tucker_reconstruct(g, factors);
}

Evaluation factor_dual_objective(const DenseTensor& u, std::size_t mode, const DenseTensor& x,
                                 const TuckerModel& model, const SolverConfig& cfg) {
  const double rho = cfg.rho_factor(mode);
  const Matrix xi = xi_operator(u, mode, model.core, model.factors);
  const Conjugate barrier =
      entropy_conjugate(DenseTensor::from_matrix(-xi / rho), model.factor_constraints.at(mode));
  Conjugate loss = loss_conjugate(x, u, cfg.loss);
  loss.grad.vec() -= xi_adjoint(barrier.grad.to_matrix(), mode, model.core, model.factors).vec();
  return {loss.value + rho * barrier.value, std::move(loss.grad)};
}

Evaluation core_dual_objective(const DenseTensor& u, const DenseTensor& x,
                               const TuckerModel& model, const SolverConfig& cfg) {
  const double rho = cfg.rho_core();
  DenseTensor omega = omega_operator(u, model.factors);
  omega.vec() /= -rho;
  const Conjugate barrier = entropy_conjugate(omega, model.core_constraint);
  Conjugate loss = loss_conjugate(x, u, cfg.loss);
  loss.grad.vec() -= omega_adjoint(barrier.grad, model.factors).vec();
  return {loss.value + rho * barrier.value, std::move(loss.grad)};
}

SinkhornResult monitored_loss(const DenseTensor& x, const DenseTensor& x_hat,
                              const LossSpec& loss, const SinkhornOptions& options) {
  if (!loss.balanced()) return loss_primal(x, x_hat, loss, options);
  // Balanced transport is infinite off the mass-matching set; accept
  // reconstructions that match up to solver precision.
  DenseTensor target = x_hat;
  auto rescale = [](const DenseTensor& a, DenseTensor& b) {
    const double ma = a.sum();
    const double mb = b.sum();
    if (ma == mb) return true;
    if (!(mb > 0.0) || std::abs(ma - mb) > 1e-6 * std::max(ma, mb)) return false;
    b.vec() *= ma / mb;
    return true;
  };
  bool feasible = true;
  if (loss.mode == LossMode::ProductTensor) {
    feasible = rescale(x, target);
  } else {
    for (std::size_t i = 0; i < x.dim(loss.slice_axis) && feasible; ++i) {
      DenseTensor part = extract_slice(target, loss.slice_axis, i);
      feasible = rescale(extract_slice(x, loss.slice_axis, i), part);
      assign_slice(target, loss.slice_axis, i, part);
    }
  }
  if (!feasible) return {std::numeric_limits<double>::infinity(), 0, 0.0, true};
  return loss_primal(x, target, loss, options);
}

ObjectiveBreakdown smoothed_objective(const DenseTensor& x, const TuckerModel& model,
                                      const SolverConfig& cfg) {
  ObjectiveBreakdown out;
  out.sinkhorn = monitored_loss(x, model.reconstruct(), cfg.loss, cfg.monitor.sinkhorn);
  out.loss = out.sinkhorn.value;
  if (!model.core_fixed) out.barrier += cfg.rho_core() * entropy(model.core);
  for (std::size_t k = 0; k < model.order(); ++k) {
    out.barrier += cfg.rho_factor(k) * entropy(DenseTensor::from_matrix(model.factors[k]));
  }
  return out;
}

double block_primal_objective(const DenseTensor& x, const TuckerModel& model, int block,
                              const SolverConfig& cfg) {
  const double loss = monitored_loss(x, model.reconstruct(), cfg.loss, cfg.monitor.sinkhorn).value;
  if (block == 0) return loss + cfg.rho_core() * entropy(model.core);
  const auto k = static_cast<std::size_t>(block - 1);
  return loss + cfg.rho_factor(k) * entropy(DenseTensor::from_matrix(model.factors.at(k)));
}

FactorUpdate solve_factor_subproblem(std::size_t mode, const DenseTensor& x,
                                     const TuckerModel& model, const SolverConfig& cfg,
                                     const DenseTensor* start) {
  check_operator_shapes(x.shape(), mode, model.core, model.factors, "solve_factor_subproblem");
  DenseTensor u0 = start ? *start : DenseTensor(x.shape());
  if (u0.shape() != x.shape()) throw ShapeError("solve_factor_subproblem: bad warm start shape");
  auto objective = [&](const DenseTensor& u) {
    return factor_dual_objective(u, mode, x, model, cfg);
  };
  FactorUpdate out;
  out.inner = inner_minimize(objective, translate_start(objective, std::move(u0)), cfg.inner);
  Matrix v = xi_operator(out.inner.solution, mode, model.core, model.factors);
  v /= -cfg.rho_factor(mode);
  out.factor = primal_recover(DenseTensor::from_matrix(v), model.factor_constraints.at(mode))
                   .to_matrix();
  return out;
}

CoreUpdate solve_core_subproblem(const DenseTensor& x, const TuckerModel& model,
                                 const SolverConfig& cfg, const DenseTensor* start) {
  if (model.data_shape() != x.shape()) throw ShapeError("solve_core_subproblem: shape mismatch");
  DenseTensor u0 = start ? *start : DenseTensor(x.shape());
  if (u0.shape() != x.shape()) throw ShapeError("solve_core_subproblem: bad warm start shape");
  auto objective = [&](const DenseTensor& u) { return core_dual_objective(u, x, model, cfg); };
  CoreUpdate out;
  out.inner = inner_minimize(objective, translate_start(objective, std::move(u0)), cfg.inner);
  DenseTensor v = omega_operator(out.inner.solution, model.factors);
  v.vec() /= -cfg.rho_core();
  out.core = primal_recover(v, model.core_constraint);
  return out;
}

std::string block_label(int block) {
  return block == 0 ? std::string("S") : "A" + std::to_string(block);
}

DecompositionResult block_coordinate_descent(const DenseTensor& x, const SolverConfig& cfg) {
  validate_config(cfg, x.shape());
  return block_coordinate_descent(x, cfg, initialize(x, cfg));
}

DecompositionResult block_coordinate_descent(const DenseTensor& x, const SolverConfig& cfg,
                                             TuckerModel initial) {
  validate_config(cfg, x.shape());
  initial.validate();
  if (initial.data_shape() != x.shape()) {
    throw ShapeError("block_coordinate_descent: model does not match the data shape");
  }
  for (double v : x.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("data must be finite and non-negative");
    }
  }
  if (!(x.sum() > 0.0)) throw ValidationError("data has zero total mass");

  const auto clock_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  };

  DecompositionResult result;
  result.model = std::move(initial);
  const std::size_t d = x.order();
  std::vector<DenseTensor> duals(d + 1);  // warm starts, indexed by block id

  double objective = smoothed_objective(x, result.model, cfg).total();
  result.trace.initial_objective = objective;
  result.objective = objective;
  if (cfg.outer_iters == 0) {
    result.converged = true;
    return result;
  }

  TuckerModel best = result.model;
  double best_objective = objective;
  TuckerModel& model = result.model;

  for (std::size_t sweep = 1; sweep <= cfg.outer_iters; ++sweep) {
    result.sweeps = sweep;
    result.inner_flagged = false;
    std::vector<int> blocks;
    for (std::size_t k = 0; k < d; ++k) blocks.push_back(static_cast<int>(k + 1));
    if (!model.core_fixed) blocks.push_back(0);

    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const int block = blocks[b];
      DenseTensor* warm = duals[static_cast<std::size_t>(block)].empty()
                              ? nullptr
                              : &duals[static_cast<std::size_t>(block)];
      InnerResult inner;
      if (block == 0) {
        auto update = solve_core_subproblem(x, model, cfg, warm);
        model.core = std::move(update.core);
        inner = std::move(update.inner);
      } else {
        const auto k = static_cast<std::size_t>(block - 1);
        auto update = solve_factor_subproblem(k, x, model, cfg, warm);
        model.factors[k] = std::move(update.factor);
        inner = std::move(update.inner);
      }
      TraceRecord record;
      record.sweep = sweep;
      record.block = block;
      record.inner_iterations = inner.iterations;
      record.status = inner.status;
      record.dual_value = inner.value;
      record.grad_norm = inner.grad_norm;
      if (!inner.converged()) result.inner_flagged = true;
      duals[static_cast<std::size_t>(block)] = std::move(inner.solution);
      if (cfg.monitor.per_block || b + 1 == blocks.size()) {
        record.primal_objective = smoothed_objective(x, model, cfg).total();
      }
      record.seconds = elapsed();
      result.trace.records.push_back(record);
    }

    const double updated = result.trace.records.back().primal_objective;
    const double change = relative_change(objective, updated);
    objective = updated;
    if (objective <= best_objective || !std::isfinite(best_objective)) {
      best = model;
      best_objective = objective;
    }
    if (change < cfg.outer_tol) {
      result.converged = true;
      break;
    }
  }
  result.model = std::move(best);
  result.objective = best_objective;
  return result;
}

TuckerModel nnsvd_init(const DenseTensor& x, const ModelSpec& spec) {
  const std::size_t d = x.order();
  const auto ranks = expanded_ranks(spec, d);
  TuckerModel model = empty_model(x, spec);
  const double floor = x.sum() / static_cast<double>(x.size()) / 100.0;

  for (std::size_t k = 0; k < d; ++k) {
    const auto r = static_cast<Eigen::Index>(ranks[k]);
    if (ranks[k] == 0 || ranks[k] > x.dim(k)) {
      throw ValidationError("nnsvd_init: rank " + std::to_string(ranks[k]) +
                            " is infeasible for mode " + std::to_string(k));
    }
    const Matrix unfolded = matricize(x, k);
    Eigen::BDCSVD<Matrix> svd(unfolded, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const Matrix& u = svd.matrixU();
    const Matrix& v = svd.matrixV();
    Matrix w = Matrix::Zero(unfolded.rows(), r);
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(r, sigma.size()); ++j) {
      if (j == 0) {
        w.col(0) = std::sqrt(sigma(0)) * u.col(0).cwiseAbs();
        continue;
      }
      const Vector xp = u.col(j).cwiseMax(0.0);
      const Vector xn = (-u.col(j)).cwiseMax(0.0);
      const Vector yp = v.col(j).cwiseMax(0.0);
      const Vector yn = (-v.col(j)).cwiseMax(0.0);
      const double mp = xp.norm() * yp.norm();
      const double mn = xn.norm() * yn.norm();
      if (mp >= mn && mp > 0.0) {
        w.col(j) = std::sqrt(sigma(j) * mp) * xp / xp.norm();
      } else if (mn > 0.0) {
        w.col(j) = std::sqrt(sigma(j) * mn) * xn / xn.norm();
      }
    }
    w = w.unaryExpr([floor](double a) { return a > 0.0 ? a : floor; });
    model.factors[k] = project_factor(w, model.factor_constraints[k]);
  }
  finish_core(model, x, ranks, 0, false);
  return model;
}

TuckerModel random_init(const DenseTensor& x, const ModelSpec& spec, std::uint64_t seed) {
  const std::size_t d = x.order();
  const auto ranks = expanded_ranks(spec, d);
  TuckerModel model = empty_model(x, spec);
  Rng rng(seed);
  for (std::size_t k = 0; k < d; ++k) {
    Matrix w(static_cast<Eigen::Index>(x.dim(k)), static_cast<Eigen::Index>(ranks[k]));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(0.1, 1.0);
    }
    model.factors[k] = project_factor(w, model.factor_constraints[k]);
  }
  finish_core(model, x, ranks, seed, true);
  return model;
}

TuckerModel initialize(const DenseTensor& x, const SolverConfig& cfg) {
  return cfg.init == InitMethod::NNSVD ? nnsvd_init(x, cfg.model)
                                       : random_init(x, cfg.model, cfg.seed);
}

Projection project_onto_basis(const DenseTensor& x_new, const TuckerModel& basis,
                              std::size_t mode, const SolverConfig& cfg,
                              const DenseTensor* start) {
  check_operator_shapes(x_new.shape(), mode, basis.core, basis.factors, "project_onto_basis");
  auto update = solve_factor_subproblem(mode, x_new, basis, cfg, start);
  return {std::move(update.factor), std::move(update.inner)};
}

}  // namespace wtf
