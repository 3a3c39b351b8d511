#include "wtf/tensor.hpp"

#include "wtf/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace wtf {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

void check_mode(const Shape& shape, std::size_t mode) {
  if (mode >= shape.size()) {
    throw ShapeError("mode " + std::to_string(mode) + " out of range for tensor of order " +
                     std::to_string(shape.size()));
  }
}

// Column strides of the mode-k unfolding: lowest remaining mode fastest.
std::vector<std::size_t> unfolding_strides(const Shape& shape, std::size_t mode) {
  std::vector<std::size_t> strides(shape.size(), 0);
  std::size_t s = 1;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    if (j == mode) continue;
    strides[j] = s;
    s *= shape[j];
  }
  return strides;
}

// Visits every multi-index in row-major order.
template <typename F>
void for_each_index(const Shape& shape, F&& f) {
  const std::size_t total = shape_volume(shape);
  std::vector<std::size_t> idx(shape.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(flat, idx);
    for (std::size_t j = shape.size(); j-- > 0;) {
      if (++idx[j] < shape[j]) break;
      idx[j] = 0;
    }
  }
}

}  // namespace

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)) {
  if (shape_.empty()) throw ShapeError("tensor must have at least one mode");
  if (std::find(shape_.begin(), shape_.end(), std::size_t{0}) != shape_.end()) {
    throw ShapeError("tensor shape entries must be positive, got " + shape_string(shape_));
  }
  data_.assign(shape_volume(shape_), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data) : DenseTensor(std::move(shape)) {
  if (data.size() != data_.size()) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                     shape_string(shape_) + " (expected " + std::to_string(data_.size()) + ")");
  }
  data_ = std::move(data);
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMajorMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

DenseTensor DenseTensor::from_vector(const Vector& v) {
  DenseTensor t({static_cast<std::size_t>(v.size())});
  t.vec() = v;
  return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw ShapeError("index order does not match tensor order");
  std::size_t off = 0;
  for (std::size_t j = 0; j < shape_.size(); ++j) {
    if (index[j] >= shape_[j]) throw ShapeError("index out of range");
    off = off * shape_[j] + index[j];
  }
  return off;
}

Matrix DenseTensor::to_matrix() const {
  if (order() != 2) throw ShapeError("to_matrix requires a 2-mode tensor");
  return Eigen::Map<const RowMajorMatrix>(data_.data(), static_cast<Eigen::Index>(shape_[0]),
                                          static_cast<Eigen::Index>(shape_[1]));
}

double DenseTensor::sum() const { return vec().sum(); }

Matrix matricize(const DenseTensor& t, std::size_t mode) {
  check_mode(t.shape(), mode);
  const auto& shape = t.shape();
  const auto strides = unfolding_strides(shape, mode);
  Matrix m(static_cast<Eigen::Index>(shape[mode]),
           static_cast<Eigen::Index>(t.size() / shape[mode]));
  const auto data = t.data();
  for_each_index(shape, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    std::size_t col = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) col += idx[j] * strides[j];
    m(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(col)) = data[flat];
  });
  return m;
}

DenseTensor tensorize(const Matrix& m, std::size_t mode, const Shape& shape) {
  check_mode(shape, mode);
  const std::size_t total = shape_volume(shape);
  if (static_cast<std::size_t>(m.rows()) != shape[mode] ||
      static_cast<std::size_t>(m.rows() * m.cols()) != total) {
    throw ShapeError("matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     " cannot be folded along mode " + std::to_string(mode) + " into " +
                     shape_string(shape));
  }
  DenseTensor t(shape);
  const auto strides = unfolding_strides(shape, mode);
  auto data = t.data();
  for_each_index(shape, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    std::size_t col = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) col += idx[j] * strides[j];
    data[flat] = m(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(col));
  });
  return t;
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& b, std::size_t mode) {
  check_mode(t.shape(), mode);
  const auto& shape = t.shape();
  const std::size_t nk = shape[mode];
  if (static_cast<std::size_t>(b.cols()) != nk) {
    throw ShapeError("mode_product: matrix has " + std::to_string(b.cols()) +
                     " columns but mode " + std::to_string(mode) + " has size " +
                     std::to_string(nk));
  }
  if (b.rows() == 0) throw ShapeError("mode_product: matrix has no rows");
  std::size_t outer = 1;
  for (std::size_t j = 0; j < mode; ++j) outer *= shape[j];
  const std::size_t inner = t.size() / (outer * nk);
  const auto m = static_cast<std::size_t>(b.rows());

  Shape out_shape = shape;
  out_shape[mode] = m;
  DenseTensor out(out_shape);
  const double* src = t.data().data();
  double* dst = out.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    Eigen::Map<const RowMajorMatrix> x(src + o * nk * inner, static_cast<Eigen::Index>(nk),
                                       static_cast<Eigen::Index>(inner));
    Eigen::Map<RowMajorMatrix> y(dst + o * m * inner, static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(inner));
    y.noalias() = b * x;
  }
  return out;
}

DenseTensor multi_mode_product(const DenseTensor& t, std::span<const ModeMatrix> products) {
  std::vector<const ModeMatrix*> ordered;
  ordered.reserve(products.size());
  for (const auto& p : products) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const ModeMatrix* a, const ModeMatrix* b) { return a->mode < b->mode; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->mode == ordered[i - 1]->mode) {
      throw ShapeError("multi_mode_product: mode " + std::to_string(ordered[i]->mode) +
                       " repeated");
    }
  }
  DenseTensor out = t;
  for (const auto* p : ordered) out = mode_product(out, p->matrix.get(), p->mode);
  return out;
}

DenseTensor tucker_reconstruct(const DenseTensor& core, std::span<const Matrix> factors) {
  if (factors.size() != core.order()) {
    throw ShapeError("tucker_reconstruct: " + std::to_string(factors.size()) +
                     " factors for a core of order " + std::to_string(core.order()));
  }
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (static_cast<std::size_t>(factors[k].cols()) != core.dim(k)) {
      throw ShapeError("tucker_reconstruct: factor " + std::to_string(k) + " has " +
                       std::to_string(factors[k].cols()) + " columns, core rank is " +
                       std::to_string(core.dim(k)));
    }
  }
  DenseTensor out = core;
  for (std::size_t k = 0; k < factors.size(); ++k) out = mode_product(out, factors[k], k);
  return out;
}

DenseTensor cp_reconstruct(std::span<const Matrix> factors) {
  if (factors.empty()) throw ShapeError("cp_reconstruct: no factors");
  const auto r = factors.front().cols();
  Shape shape;
  for (const auto& f : factors) {
    if (f.cols() != r) throw ShapeError("cp_reconstruct: factors disagree on rank");
    shape.push_back(static_cast<std::size_t>(f.rows()));
  }
  DenseTensor out(shape);
  auto data = out.data();
  for_each_index(shape, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < r; ++c) {
      double term = 1.0;
      for (std::size_t k = 0; k < factors.size(); ++k) {
        term *= factors[k](static_cast<Eigen::Index>(idx[k]), c);
      }
      acc += term;
    }
    data[flat] = acc;
  });
  return out;
}

DenseTensor superdiagonal(std::size_t rank, std::size_t order, double value) {
  DenseTensor s(Shape(order, rank));
  std::size_t step = 0;
  for (std::size_t j = 0; j < order; ++j) step = step * rank + 1;
  for (std::size_t i = 0; i < rank; ++i) s[i * step] = value;
  return s;
}

namespace {

struct SliceLayout {
  std::size_t outer;
  std::size_t extent;
  std::size_t inner;
};

SliceLayout slice_layout(const Shape& shape, std::size_t axis, std::size_t index) {
  check_mode(shape, axis);
  if (index >= shape[axis]) {
    throw ShapeError("slice index " + std::to_string(index) + " out of range for axis of size " +
                     std::to_string(shape[axis]));
  }
  std::size_t outer = 1;
  for (std::size_t j = 0; j < axis; ++j) outer *= shape[j];
  return {outer, shape[axis], shape_volume(shape) / (outer * shape[axis])};
}

Shape slice_shape(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    if (j != axis) out.push_back(shape[j]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

}  // namespace

DenseTensor extract_slice(const DenseTensor& t, std::size_t axis, std::size_t index) {
  const auto layout = slice_layout(t.shape(), axis, index);
  DenseTensor out(slice_shape(t.shape(), axis));
  const auto src = t.data();
  auto dst = out.data();
  for (std::size_t o = 0; o < layout.outer; ++o) {
    const std::size_t base = (o * layout.extent + index) * layout.inner;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(base), layout.inner,
                dst.begin() + static_cast<std::ptrdiff_t>(o * layout.inner));
  }
  return out;
}

void assign_slice(DenseTensor& t, std::size_t axis, std::size_t index, const DenseTensor& slice) {
  const auto layout = slice_layout(t.shape(), axis, index);
  if (slice.shape() != slice_shape(t.shape(), axis)) {
    throw ShapeError("assign_slice: slice shape " + shape_string(slice.shape()) +
                     " does not fit tensor " + shape_string(t.shape()));
  }
  const auto src = slice.data();
  auto dst = t.data();
  for (std::size_t o = 0; o < layout.outer; ++o) {
    const std::size_t base = (o * layout.extent + index) * layout.inner;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * layout.inner), layout.inner,
                dst.begin() + static_cast<std::ptrdiff_t>(base));
  }
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("inner_product: shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
  }
  return a.vec().dot(b.vec());
}

double frobenius_norm(const DenseTensor& t) { return t.vec().norm(); }

}  // namespace wtf
