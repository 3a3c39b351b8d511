#pragma once

#include "wtf/tensor.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace wtf {

/// Regular-grid ground cost C_ij = |x_i - x_j|^p on linspace(a, b, n),
/// optionally divided by its mean entry.
[[nodiscard]] Matrix build_grid_cost(std::size_t n, double a, double b, double p,
                                     bool normalize_unit_mean);

/// Factored Gibbs kernel of an additively separable cost. Only the per-mode
/// log-kernels -C^(k)/eps are stored; the 2d-mode kernel is never formed.
class GibbsKernel {
 public:
  GibbsKernel() = default;
  GibbsKernel(std::vector<Matrix> costs, double epsilon);

  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
  [[nodiscard]] std::size_t order() const noexcept { return log_kernels_.size(); }
  [[nodiscard]] const Matrix& log_kernel(std::size_t mode) const { return log_kernels_.at(mode); }
  [[nodiscard]] const Matrix& cost(std::size_t mode) const { return costs_.at(mode); }
  [[nodiscard]] Shape shape() const;

  /// log(K exp(log_t)), or log(K^T exp(log_t)) when `transpose` is set.
  /// Entries of log_t may be -inf (zero mass).
  [[nodiscard]] DenseTensor apply_log(const DenseTensor& log_t, bool transpose = false) const;

 private:
  double epsilon_ = 0.0;
  std::vector<Matrix> costs_;
  std::vector<Matrix> log_kernels_;
  std::vector<Matrix> kernels_;
  std::vector<Matrix> kernels_t_;
  std::vector<Matrix> log_kernels_t_;
};

[[nodiscard]] GibbsKernel gibbs_kernel(std::vector<Matrix> costs, double epsilon);

[[nodiscard]] inline DenseTensor kernel_apply_log(const GibbsKernel& kernel,
                                                  const DenseTensor& log_t) {
  return kernel.apply_log(log_t, false);
}

inline constexpr double kBalanced = std::numeric_limits<double>::infinity();

/// Value and gradient of a conjugate function.
struct Conjugate {
  double value = 0.0;
  DenseTensor grad;
};

/// Legendre transform of beta -> OT_eps(alpha, beta) at u. The gradient is the
/// optimal second marginal and carries the mass of alpha.
[[nodiscard]] Conjugate ot_conjugate_balanced(const DenseTensor& alpha, const DenseTensor& u,
                                              const GibbsKernel& kernel);

/// Legendre transform of beta -> OT^lambda_eps(alpha, beta) at u. Requires
/// u < lambda entrywise; throws DomainViolation otherwise.
[[nodiscard]] Conjugate ot_conjugate_semiunbalanced(const DenseTensor& alpha,
                                                    const DenseTensor& u,
                                                    const GibbsKernel& kernel, double lambda);

/// Dispatches on lambda; kBalanced selects the balanced transform.
[[nodiscard]] Conjugate ot_conjugate(const DenseTensor& alpha, const DenseTensor& u,
                                     const GibbsKernel& kernel, double lambda);

enum class LossMode { ProductTensor, SliceSum };

/// Which OT loss Phi compares data and reconstruction with.
///
/// ProductTensor: one transport problem on the product space of all modes;
/// the kernel has one factor per mode of the data.
/// SliceSum: a sum of transport problems over the slices along `slice_axis`;
/// the kernel has one factor per remaining mode.
struct LossSpec {
  LossMode mode = LossMode::ProductTensor;
  std::size_t slice_axis = 0;
  double lambda = kBalanced;
  GibbsKernel kernel;

  [[nodiscard]] double epsilon() const noexcept { return kernel.epsilon(); }
  [[nodiscard]] bool balanced() const noexcept { return lambda == kBalanced; }
};

/// Checks the loss settings against a data tensor shape; throws ValidationError.
void validate_loss(const LossSpec& spec, const Shape& data_shape);

/// Phi*(X, U) with gradient.
[[nodiscard]] Conjugate loss_conjugate(const DenseTensor& x, const DenseTensor& u,
                                       const LossSpec& spec);

struct SinkhornOptions {
  double tol = 1e-9;
  std::size_t max_iter = 10000;
};

struct SinkhornResult {
  double value = 0.0;
  std::size_t iterations = 0;
  /// L1 marginal residual at exit.
  double residual = 0.0;
  bool converged = false;
};

/// Log-domain Sinkhorn for OT_eps(alpha, beta) = <C, g> + eps E(g). Throws
/// ValidationError when the masses differ by more than 1e-8.
[[nodiscard]] SinkhornResult sinkhorn_balanced(const DenseTensor& alpha, const DenseTensor& beta,
                                               const GibbsKernel& kernel,
                                               const SinkhornOptions& options = {});

/// Scaling iterations for OT^lambda_eps(alpha, beta), with the first marginal
/// held exactly and the second relaxed by lambda * KL.
[[nodiscard]] SinkhornResult sinkhorn_semiunbalanced(const DenseTensor& alpha,
                                                     const DenseTensor& beta,
                                                     const GibbsKernel& kernel, double lambda,
                                                     const SinkhornOptions& options = {});

/// Phi(X, Xhat) through the Sinkhorn evaluators; slice losses are summed and
/// the worst residual is reported.
[[nodiscard]] SinkhornResult loss_primal(const DenseTensor& x, const DenseTensor& x_hat,
                                         const LossSpec& spec,
                                         const SinkhornOptions& options = {});

/// Optimal coupling for a 1-mode problem at dual point u (diagnostics only).
[[nodiscard]] Matrix optimal_coupling_1d(const DenseTensor& alpha, const DenseTensor& u,
                                         const GibbsKernel& kernel, double lambda);

}  // namespace wtf
