#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace wtf {

using Shape = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense d-mode array of doubles stored in row-major order (last index
/// fastest). Modes are numbered from 0 in this API.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape, double fill = 0.0);
  DenseTensor(Shape shape, std::vector<double> data);

  /// Row-major 2-mode copy of an Eigen matrix.
  static DenseTensor from_matrix(const Matrix& m);
  /// 1-mode copy of an Eigen vector.
  static DenseTensor from_vector(const Vector& v);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t order() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  [[nodiscard]] Eigen::Map<const Vector> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  [[nodiscard]] Eigen::Map<Vector> vec() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  [[nodiscard]] double at(std::initializer_list<std::size_t> index) const {
    return data_[offset(index)];
  }
  [[nodiscard]] std::size_t offset(std::span<const std::size_t> index) const;
  [[nodiscard]] std::size_t offset(std::initializer_list<std::size_t> index) const {
    return offset(std::span<const std::size_t>(index.begin(), index.size()));
  }

  /// Copy as an Eigen matrix; requires order() == 2.
  [[nodiscard]] Matrix to_matrix() const;

  [[nodiscard]] double sum() const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

[[nodiscard]] std::size_t shape_volume(const Shape& shape);

/// Mode-k unfolding, n_k x prod_{i != k} n_i. Column of the multi-index
/// (i_1..i_d) without i_k is sum_{j != k} i_j prod_{m != k, m < j} n_m, so the
/// lowest remaining mode varies fastest.
[[nodiscard]] Matrix matricize(const DenseTensor& t, std::size_t mode);

/// Inverse of matricize.
[[nodiscard]] DenseTensor tensorize(const Matrix& m, std::size_t mode, const Shape& shape);

/// (T x_k B)_{..j..} = sum_i T_{..i..} B_{j,i}.
[[nodiscard]] DenseTensor mode_product(const DenseTensor& t, const Matrix& b, std::size_t mode);

struct ModeMatrix {
  std::size_t mode;
  std::reference_wrapper<const Matrix> matrix;
};

/// Applies each matrix along its mode, in ascending mode order.
[[nodiscard]] DenseTensor multi_mode_product(const DenseTensor& t,
                                             std::span<const ModeMatrix> products);

/// S x_1 A^(1) x_2 ... x_d A^(d).
[[nodiscard]] DenseTensor tucker_reconstruct(const DenseTensor& core,
                                             std::span<const Matrix> factors);

/// Sum of r rank-1 outer products of matching factor columns.
[[nodiscard]] DenseTensor cp_reconstruct(std::span<const Matrix> factors);

/// r x ... x r tensor with ones on the superdiagonal.
[[nodiscard]] DenseTensor superdiagonal(std::size_t rank, std::size_t order, double value = 1.0);

/// The (d-1)-mode slice at position `index` along `axis`. A 1-mode tensor
/// yields a single-entry tensor of shape (1).
[[nodiscard]] DenseTensor extract_slice(const DenseTensor& t, std::size_t axis, std::size_t index);

/// Writes `slice` into `t` at position `index` along `axis`.
void assign_slice(DenseTensor& t, std::size_t axis, std::size_t index, const DenseTensor& slice);

[[nodiscard]] double inner_product(const DenseTensor& a, const DenseTensor& b);

[[nodiscard]] double frobenius_norm(const DenseTensor& t);

}  // namespace wtf
