#pragma once

#include "wtf/tensor.hpp"

#include <cstddef>
#include <functional>

namespace wtf {

/// Objective value and gradient at a point.
struct Evaluation {
  double value = 0.0;
  DenseTensor grad;
};

/// Smooth objective. May throw DomainViolation outside its domain; the line
/// search treats that as a failed trial step.
using SmoothObjective = std::function<Evaluation(const DenseTensor&)>;

enum class InnerMethod { LBFGS, GradientDescent };

struct InnerOptions {
  InnerMethod method = InnerMethod::LBFGS;
  /// Stop once the gradient sup-norm falls to this level.
  double grad_tol = 1e-8;
  std::size_t max_iters = 1000;
  std::size_t memory = 10;
  double armijo = 1e-4;
  double initial_step = 1.0;
  std::size_t max_halvings = 60;
};

enum class InnerStatus { Converged, MaxIterations, LineSearchFailed };

struct InnerResult {
  DenseTensor solution;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t domain_rejections = 0;
  InnerStatus status = InnerStatus::MaxIterations;

  [[nodiscard]] bool converged() const noexcept { return status == InnerStatus::Converged; }
};

/// Called with every accepted iterate (the start point included).
using IterateObserver = std::function<void(const DenseTensor&, const Evaluation&)>;

/// Minimises a smooth convex objective with L-BFGS or gradient descent and a
/// backtracking Armijo line search. Never throws on non-convergence; the best
/// iterate is returned with a status flag. The start point must lie in the
/// objective's domain.
[[nodiscard]] InnerResult inner_minimize(const SmoothObjective& objective, DenseTensor start,
                                         const InnerOptions& options,
                                         const IterateObserver& observer = {});

}  // namespace wtf
