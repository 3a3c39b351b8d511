#include "wtf/optimize.hpp"

#include "wtf/error.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace wtf {

namespace {

struct CurvaturePair {
  Vector s;
  Vector y;
  double rho;
};

// Two-loop recursion: returns -H g for the implicit inverse Hessian H.
Vector lbfgs_direction(const Eigen::Ref<const Vector>& grad,
                       const std::deque<CurvaturePair>& history) {
  Vector q = grad;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  if (!history.empty()) {
    const auto& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return -q;
}

bool values_indistinguishable(double a, double b) {
  return std::abs(a - b) <= 8.0 * std::numeric_limits<double>::epsilon() *
                                (std::abs(a) + std::abs(b) + 1e-300);
}

}  // namespace

InnerResult inner_minimize(const SmoothObjective& objective, DenseTensor start,
                           const InnerOptions& options, const IterateObserver& observer) {
  InnerResult result;
  DenseTensor x = std::move(start);
  Evaluation current = objective(x);
  result.evaluations = 1;
  if (observer) observer(x, current);

  std::deque<CurvaturePair> history;
  double previous_step = options.initial_step;
  double grad_norm = current.grad.vec().lpNorm<Eigen::Infinity>();

  for (std::size_t it = 0;; ++it) {
    result.iterations = it;
    if (grad_norm <= options.grad_tol) {
      result.status = InnerStatus::Converged;
      break;
    }
    if (it >= options.max_iters) {
      result.status = InnerStatus::MaxIterations;
      break;
    }

    const auto g = current.grad.vec();
    Vector direction = options.method == InnerMethod::LBFGS ? lbfgs_direction(g, history)
                                                            : Vector(-g);
    double slope = direction.dot(g);
    if (!(slope < 0.0)) {
      history.clear();
      direction = -g;
      slope = direction.dot(g);
    }

    double step = options.initial_step;
    if (options.method == InnerMethod::GradientDescent && it > 0) {
      step = std::min(2.0 * previous_step, 1e12);
    }

    bool accepted = false;
    DenseTensor trial_x;
    Evaluation trial;
    for (std::size_t h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      trial_x = x;
      trial_x.vec() += step * direction;
      try {
        trial = objective(trial_x);
        ++result.evaluations;
      } catch (const DomainViolation&) {
        ++result.evaluations;
        ++result.domain_rejections;
        continue;
      }
      if (!std::isfinite(trial.value)) continue;
      if (trial.value <= current.value + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      // At the rounding floor of the objective, accept steps that still
      // shrink the gradient.
      if (values_indistinguishable(trial.value, current.value) &&
          trial.grad.vec().lpNorm<Eigen::Infinity>() < grad_norm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.status = InnerStatus::LineSearchFailed;
      break;
    }

    previous_step = step;
    Vector s = step * direction;
    Vector y = trial.grad.vec() - g;
    const double sy = s.dot(y);
    if (options.method == InnerMethod::LBFGS && sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      history.push_back({std::move(s), std::move(y), 1.0 / sy});
      while (history.size() > options.memory) history.pop_front();
    }
    x = std::move(trial_x);
    current = std::move(trial);
    grad_norm = current.grad.vec().lpNorm<Eigen::Infinity>();
    if (observer) observer(x, current);
  }

  result.solution = std::move(x);
  result.value = current.value;
  result.grad_norm = grad_norm;
  return result;
}

}  // namespace wtf
