#include "wtf/ot.hpp"

#include "wtf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wtf {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sums below this are recomputed with an exact log-sum-exp: a term that
// underflowed in the shifted product is then negligible relative to the rest.
constexpr double kUnderflowGuard = 1e-250;

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

DenseTensor log_of(const DenseTensor& t) {
  DenseTensor out(t.shape());
  auto src = t.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = safe_log(src[i]);
  return out;
}

// out_i = log sum_j exp(L_ij + x_j) along one mode.
//
// Each fiber is shifted by its maximum, contracted with exp(L) as a dense
// product, and any entry whose shifted sum is tiny is redone exactly. The
// result agrees with the direct log-sum-exp to rounding.
DenseTensor log_contract_mode(const DenseTensor& x, const Matrix& kernel, const Matrix& log_kernel,
                              std::size_t mode) {
  const auto& shape = x.shape();
  const std::size_t n = shape[mode];
  std::size_t outer = 1;
  for (std::size_t j = 0; j < mode; ++j) outer *= shape[j];
  const std::size_t inner = x.size() / (outer * n);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ii = static_cast<Eigen::Index>(inner);

  DenseTensor out(shape);
  RowMajorMatrix shifted(ni, ii);
  RowMajorMatrix summed(ni, ii);
  Eigen::RowVectorXd col_max(ii);

  for (std::size_t o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajorMatrix> xs(x.data().data() + o * n * inner, ni, ii);
    Eigen::Map<RowMajorMatrix> ys(out.data().data() + o * n * inner, ni, ii);
    col_max = xs.colwise().maxCoeff();
    for (Eigen::Index c = 0; c < ii; ++c) {
      const double m = std::isinf(col_max(c)) && col_max(c) < 0 ? 0.0 : col_max(c);
      for (Eigen::Index j = 0; j < ni; ++j) shifted(j, c) = std::exp(xs(j, c) - m);
    }
    summed.noalias() = kernel * shifted;
    for (Eigen::Index c = 0; c < ii; ++c) {
      if (std::isinf(col_max(c)) && col_max(c) < 0) {
        ys.col(c).setConstant(kNegInf);
        continue;
      }
      for (Eigen::Index i = 0; i < ni; ++i) {
        const double s = summed(i, c);
        if (s >= kUnderflowGuard) {
          ys(i, c) = std::log(s) + col_max(c);
          continue;
        }
        double m = kNegInf;
        for (Eigen::Index j = 0; j < ni; ++j) m = std::max(m, log_kernel(i, j) + xs(j, c));
        if (std::isinf(m)) {
          ys(i, c) = kNegInf;
          continue;
        }
        double acc = 0.0;
        for (Eigen::Index j = 0; j < ni; ++j) acc += std::exp(log_kernel(i, j) + xs(j, c) - m);
        ys(i, c) = m + std::log(acc);
      }
    }
  }
  return out;
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
  if (a.shape() != b.shape()) throw ShapeError(std::string(what) + ": shape mismatch");
}

void require_kernel_shape(const GibbsKernel& kernel, const DenseTensor& t, const char* what) {
  if (kernel.shape() != t.shape()) {
    throw ShapeError(std::string(what) + ": kernel mode sizes do not match tensor shape");
  }
}

double check_measure(const DenseTensor& t, const char* what) {
  double mass = 0.0;
  for (double v : t.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(what) + ": entries must be finite and non-negative");
    }
    mass += v;
  }
  return mass;
}

void check_finite(const DenseTensor& t, const char* what) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": non-finite dual variable");
  }
}

// Shared closed form: value = -eps <alpha, log(alpha / K f) - 1>,
// grad = g(u) f (K^T (alpha / K f)), with log f and log g given.
Conjugate conjugate_from_scalings(const DenseTensor& alpha, const DenseTensor& log_f,
                                  const DenseTensor* log_g, const GibbsKernel& kernel) {
  const double eps = kernel.epsilon();
  const DenseTensor log_kf = kernel.apply_log(log_f);
  DenseTensor log_w(alpha.shape());
  double value = 0.0;
  {
    auto a = alpha.data();
    auto lk = log_kf.data();
    auto lw = log_w.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] > 0.0) {
        const double la = std::log(a[i]);
        value -= eps * a[i] * (la - lk[i] - 1.0);
        lw[i] = la - lk[i];
      } else {
        lw[i] = kNegInf;
      }
    }
  }
  DenseTensor grad = kernel.apply_log(log_w, true);
  auto g = grad.data();
  auto lf = log_f.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    double e = g[i] + lf[i];
    if (log_g) e += log_g->data()[i];
    g[i] = std::exp(e);
  }
  return {value, std::move(grad)};
}

}  // namespace

Matrix build_grid_cost(std::size_t n, double a, double b, double p, bool normalize_unit_mean) {
  if (n == 0) throw ValidationError("build_grid_cost: grid size must be positive");
  if (!(a < b)) throw ValidationError("build_grid_cost: domain must satisfy a < b");
  if (!(p >= 1.0)) throw ValidationError("build_grid_cost: exponent must be >= 1");
  Vector x = Vector::LinSpaced(static_cast<Eigen::Index>(n), a, b);
  if (n == 1) x(0) = a;
  Matrix c(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index j = 0; j < x.size(); ++j) c(i, j) = std::pow(std::abs(x(i) - x(j)), p);
  }
  if (normalize_unit_mean) {
    const double mean = c.mean();
    if (mean > 0.0) c /= mean;
  }
  return c;
}

GibbsKernel::GibbsKernel(std::vector<Matrix> costs, double epsilon)
    : epsilon_(epsilon), costs_(std::move(costs)) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("gibbs_kernel: epsilon must be positive, got " + std::to_string(epsilon));
  }
  if (costs_.empty()) throw ShapeError("gibbs_kernel: at least one mode cost is required");
  for (const auto& c : costs_) {
    if (c.rows() != c.cols() || c.rows() == 0) {
      throw ShapeError("gibbs_kernel: mode costs must be non-empty square matrices");
    }
    if (!c.allFinite()) throw ValidationError("gibbs_kernel: non-finite cost entry");
    Matrix l = -c / epsilon;
    kernels_.push_back(l.array().exp().matrix());
    kernels_t_.push_back(kernels_.back().transpose());
    log_kernels_t_.push_back(l.transpose());
    log_kernels_.push_back(std::move(l));
  }
}

GibbsKernel gibbs_kernel(std::vector<Matrix> costs, double epsilon) {
  return GibbsKernel(std::move(costs), epsilon);
}

Shape GibbsKernel::shape() const {
  Shape s;
  for (const auto& l : log_kernels_) s.push_back(static_cast<std::size_t>(l.rows()));
  return s;
}

DenseTensor GibbsKernel::apply_log(const DenseTensor& log_t, bool transpose) const {
  require_kernel_shape(*this, log_t, "kernel_apply_log");
  const auto& ks = transpose ? kernels_t_ : kernels_;
  const auto& ls = transpose ? log_kernels_t_ : log_kernels_;
  DenseTensor out = log_contract_mode(log_t, ks[0], ls[0], 0);
  for (std::size_t k = 1; k < ks.size(); ++k) out = log_contract_mode(out, ks[k], ls[k], k);
  return out;
}

Conjugate ot_conjugate_balanced(const DenseTensor& alpha, const DenseTensor& u,
                                const GibbsKernel& kernel) {
  require_same_shape(alpha, u, "ot_conjugate_balanced");
  require_kernel_shape(kernel, u, "ot_conjugate_balanced");
  if (!(check_measure(alpha, "ot_conjugate_balanced") > 0.0)) {
    throw ValidationError("ot_conjugate_balanced: alpha has zero total mass");
  }
  check_finite(u, "ot_conjugate_balanced");
  DenseTensor log_f = u;
  log_f.vec() /= kernel.epsilon();
  return conjugate_from_scalings(alpha, log_f, nullptr, kernel);
}

Conjugate ot_conjugate_semiunbalanced(const DenseTensor& alpha, const DenseTensor& u,
                                      const GibbsKernel& kernel, double lambda) {
  require_same_shape(alpha, u, "ot_conjugate_semiunbalanced");
  require_kernel_shape(kernel, u, "ot_conjugate_semiunbalanced");
  if (!(lambda > 0.0)) throw ValidationError("ot_conjugate_semiunbalanced: lambda must be positive");
  if (!(check_measure(alpha, "ot_conjugate_semiunbalanced") > 0.0)) {
    throw ValidationError("ot_conjugate_semiunbalanced: alpha has zero total mass");
  }
  check_finite(u, "ot_conjugate_semiunbalanced");
  const double eps = kernel.epsilon();
  DenseTensor log_f(u.shape());
  DenseTensor log_g(u.shape());
  auto uv = u.data();
  for (std::size_t i = 0; i < uv.size(); ++i) {
    if (!(uv[i] < lambda)) {
      throw DomainViolation("dual variable " + std::to_string(uv[i]) +
                            " is not below lambda = " + std::to_string(lambda));
    }
    // log(lambda / (lambda - u)) = -log1p(-u / lambda)
    const double lg = -std::log1p(-uv[i] / lambda);
    log_g[i] = lg;
    log_f[i] = (lambda / eps) * lg;
  }
  return conjugate_from_scalings(alpha, log_f, &log_g, kernel);
}

Conjugate ot_conjugate(const DenseTensor& alpha, const DenseTensor& u, const GibbsKernel& kernel,
                       double lambda) {
  if (lambda == kBalanced) return ot_conjugate_balanced(alpha, u, kernel);
  return ot_conjugate_semiunbalanced(alpha, u, kernel, lambda);
}

void validate_loss(const LossSpec& spec, const Shape& data_shape) {
  if (spec.kernel.order() == 0) throw ValidationError("loss: kernel is not initialised");
  if (!(spec.lambda > 0.0)) throw ValidationError("loss: lambda must be positive");
  Shape expected = data_shape;
  if (spec.mode == LossMode::SliceSum) {
    if (data_shape.size() < 2) {
      throw ValidationError("loss: slice-sum mode needs a tensor with at least two modes");
    }
    if (spec.slice_axis >= data_shape.size()) {
      throw ValidationError("loss: slice axis " + std::to_string(spec.slice_axis) +
                            " is not a valid mode");
    }
    expected.erase(expected.begin() + static_cast<std::ptrdiff_t>(spec.slice_axis));
  }
  if (spec.kernel.shape() != expected) {
    throw ValidationError("loss: kernel mode sizes do not match the data shape");
  }
}

Conjugate loss_conjugate(const DenseTensor& x, const DenseTensor& u, const LossSpec& spec) {
  require_same_shape(x, u, "loss_conjugate");
  validate_loss(spec, x.shape());
  if (spec.mode == LossMode::ProductTensor) return ot_conjugate(x, u, spec.kernel, spec.lambda);

  const std::size_t axis = spec.slice_axis;
  Conjugate total{0.0, DenseTensor(u.shape())};
  for (std::size_t i = 0; i < x.dim(axis); ++i) {
    const DenseTensor xs = extract_slice(x, axis, i);
    const DenseTensor us = extract_slice(u, axis, i);
    if (!(check_measure(xs, "loss_conjugate") > 0.0)) {
      // An empty slice contributes nothing, but the domain still applies.
      check_finite(us, "loss_conjugate");
      if (!spec.balanced() && us.vec().maxCoeff() >= spec.lambda) {
        throw DomainViolation("dual variable is not below lambda");
      }
      continue;
    }
    Conjugate part = ot_conjugate(xs, us, spec.kernel, spec.lambda);
    total.value += part.value;
    assign_slice(total.grad, axis, i, part.grad);
  }
  return total;
}

SinkhornResult sinkhorn_balanced(const DenseTensor& alpha, const DenseTensor& beta,
                                 const GibbsKernel& kernel, const SinkhornOptions& options) {
  require_same_shape(alpha, beta, "sinkhorn_balanced");
  require_kernel_shape(kernel, alpha, "sinkhorn_balanced");
  const double ma = check_measure(alpha, "sinkhorn_balanced");
  const double mb = check_measure(beta, "sinkhorn_balanced");
  if (std::abs(ma - mb) > 1e-8) {
    throw ValidationError("sinkhorn_balanced: mass mismatch (" + std::to_string(ma) + " vs " +
                          std::to_string(mb) + ")");
  }
  if (!(ma > 0.0)) return {0.0, 0, 0.0, true};

  const double eps = kernel.epsilon();
  const DenseTensor log_a = log_of(alpha);
  const DenseTensor log_b = log_of(beta);
  DenseTensor f(alpha.shape());  // potentials in units of eps
  DenseTensor g(alpha.shape());
  SinkhornResult result;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const DenseTensor kg = kernel.apply_log(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = log_a[i] - kg[i];
    const DenseTensor ktf = kernel.apply_log(f, true);
    // Rows are exact after the f update; measure the column marginal.
    double residual = 0.0;
    double value = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double c = std::exp(g[j] + ktf[j]);
      residual += std::abs(c - beta[j]);
      if (c > 0.0) value += c * g[j];
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (alpha[i] > 0.0) value += alpha[i] * f[i];
    }
    result = {eps * (value - ma), it, residual, residual < options.tol};
    if (!std::isfinite(residual)) break;
    if (result.converged) break;
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = log_b[j] - ktf[j];
  }
  return result;
}

SinkhornResult sinkhorn_semiunbalanced(const DenseTensor& alpha, const DenseTensor& beta,
                                       const GibbsKernel& kernel, double lambda,
                                       const SinkhornOptions& options) {
  require_same_shape(alpha, beta, "sinkhorn_semiunbalanced");
  require_kernel_shape(kernel, alpha, "sinkhorn_semiunbalanced");
  if (!(lambda > 0.0)) throw ValidationError("sinkhorn_semiunbalanced: lambda must be positive");
  if (lambda == kBalanced) return sinkhorn_balanced(alpha, beta, kernel, options);
  const double ma = check_measure(alpha, "sinkhorn_semiunbalanced");
  const double mb = check_measure(beta, "sinkhorn_semiunbalanced");
  if (!(ma > 0.0)) return {lambda * mb, 0, 0.0, true};
  if (!(mb > 0.0)) return {std::numeric_limits<double>::infinity(), 0, 0.0, true};

  const double eps = kernel.epsilon();
  const double damping = lambda / (lambda + eps);
  const DenseTensor log_a = log_of(alpha);
  const DenseTensor log_b = log_of(beta);
  DenseTensor f(alpha.shape());
  DenseTensor g(alpha.shape());
  SinkhornResult result;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const DenseTensor kg = kernel.apply_log(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = log_a[i] - kg[i];
    const DenseTensor ktf = kernel.apply_log(f, true);
    // Fixed point of the relaxed update: c = beta * exp(-eps g / lambda).
    double residual = 0.0;
    double value = 0.0;
    double kl = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double c = std::exp(g[j] + ktf[j]);
      if (beta[j] > 0.0) {
        residual += std::abs(c - beta[j] * std::exp(-eps * g[j] / lambda));
        if (c > 0.0) {
          value += c * g[j];
          kl += c * std::log(c / beta[j]) - c + beta[j];
        } else {
          kl += beta[j];
        }
      } else {
        residual += c;
      }
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (alpha[i] > 0.0) value += alpha[i] * f[i];
    }
    result = {eps * (value - ma) + lambda * kl, it, residual, residual < options.tol};
    if (!std::isfinite(residual)) break;
    if (result.converged) break;
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = damping * (log_b[j] - ktf[j]);
    // The damped update shrinks a constant offset of g only by `damping` per
    // sweep. Solve for the optimal offset in closed form instead, so that
    // sum beta * exp(-eps g / lambda) equals the mass of alpha.
    double s = 0.0;
    double shift = kNegInf;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (beta[j] > 0.0) shift = std::max(shift, log_b[j] - eps * g[j] / lambda);
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (beta[j] > 0.0) s += std::exp(log_b[j] - eps * g[j] / lambda - shift);
    }
    const double offset = (lambda / eps) * (std::log(s) + shift - std::log(ma));
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += offset;
  }
  return result;
}

SinkhornResult loss_primal(const DenseTensor& x, const DenseTensor& x_hat, const LossSpec& spec,
                           const SinkhornOptions& options) {
  require_same_shape(x, x_hat, "loss_primal");
  validate_loss(spec, x.shape());
  auto run = [&](const DenseTensor& a, const DenseTensor& b) {
    return spec.balanced() ? sinkhorn_balanced(a, b, spec.kernel, options)
                           : sinkhorn_semiunbalanced(a, b, spec.kernel, spec.lambda, options);
  };
  if (spec.mode == LossMode::ProductTensor) return run(x, x_hat);
  SinkhornResult total{0.0, 0, 0.0, true};
  for (std::size_t i = 0; i < x.dim(spec.slice_axis); ++i) {
    const auto part = run(extract_slice(x, spec.slice_axis, i),
                          extract_slice(x_hat, spec.slice_axis, i));
    total.value += part.value;
    total.iterations = std::max(total.iterations, part.iterations);
    total.residual = std::max(total.residual, part.residual);
    total.converged = total.converged && part.converged;
  }
  return total;
}

Matrix optimal_coupling_1d(const DenseTensor& alpha, const DenseTensor& u,
                           const GibbsKernel& kernel, double lambda) {
  if (alpha.order() != 1 || kernel.order() != 1) {
    throw ShapeError("optimal_coupling_1d: only 1-mode problems are supported");
  }
  require_same_shape(alpha, u, "optimal_coupling_1d");
  require_kernel_shape(kernel, u, "optimal_coupling_1d");
  const double eps = kernel.epsilon();
  DenseTensor log_f(u.shape());
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (lambda == kBalanced) {
      log_f[j] = u[j] / eps;
    } else {
      if (!(u[j] < lambda)) throw DomainViolation("dual variable is not below lambda");
      log_f[j] = -(lambda / eps) * std::log1p(-u[j] / lambda);
    }
  }
  const DenseTensor log_kf = kernel.apply_log(log_f);
  const auto n = static_cast<Eigen::Index>(u.size());
  Matrix gamma = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(alpha[static_cast<std::size_t>(i)] > 0.0)) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      gamma(i, j) = std::exp(std::log(alpha[static_cast<std::size_t>(i)]) +
                             kernel.log_kernel(0)(i, j) + log_f[static_cast<std::size_t>(j)] -
                             log_kf[static_cast<std::size_t>(i)]);
    }
  }
  return gamma;
}

}  // namespace wtf
