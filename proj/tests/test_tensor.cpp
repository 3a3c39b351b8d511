#include "oracles.hpp"

#include "wtf/error.hpp"
#include "wtf/tensor.hpp"

#include <gtest/gtest.h>

using namespace wtf;
using wtf::testing::all_indices;
using wtf::testing::random_matrix;
using wtf::testing::random_tensor;

namespace {

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  EXPECT_EQ(a.shape(), b.shape());
  return (a.vec() - b.vec()).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST(DenseTensor, RejectsInvalidShapes) {
  EXPECT_THROW(DenseTensor(Shape{}), ShapeError);
  EXPECT_THROW(DenseTensor(Shape{2, 0}), ShapeError);
  EXPECT_THROW(DenseTensor(Shape{2, 2}, std::vector<double>(3)), ShapeError);
}

TEST(DenseTensor, RowMajorOffsets) {
  DenseTensor t({2, 3, 4});
  EXPECT_EQ(t.offset({1, 2, 3}), 23u);
  EXPECT_EQ(t.offset({0, 1, 0}), 4u);
  EXPECT_THROW((void)t.offset({2, 0, 0}), ShapeError);
}

TEST(Matricize, MatrixModeZeroIsIdentity) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_EQ(matricize(DenseTensor::from_matrix(m), 0), m);
}

TEST(Matricize, ShapeArithmetic) {
  DenseTensor t({2, 3, 4});
  const Matrix m = matricize(t, 1);
  EXPECT_EQ(m.rows(), 3);
  EXPECT_EQ(m.cols(), 8);
  EXPECT_THROW((void)matricize(t, 3), ShapeError);
}

TEST(Matricize, ColumnOrderMatchesIndexLoop) {
  const Shape shape{2, 3, 4};
  DenseTensor t(shape);
  for (const auto& i : all_indices(shape)) t.at({i[0], i[1], i[2]}) = 100.0 * i[0] + 10.0 * i[1] + i[2];
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix m = matricize(t, k);
    for (const auto& i : all_indices(shape)) {
      // Lowest remaining mode varies fastest.
      std::size_t col = 0;
      std::size_t stride = 1;
      for (std::size_t j = 0; j < 3; ++j) {
        if (j == k) continue;
        col += i[j] * stride;
        stride *= shape[j];
      }
      EXPECT_EQ(m(static_cast<Eigen::Index>(i[k]), static_cast<Eigen::Index>(col)),
                100.0 * i[0] + 10.0 * i[1] + i[2]);
    }
  }
}

TEST(Tensorize, RoundTripsEveryModeUpToOrderFour) {
  Rng rng(1);
  for (const Shape& shape : {Shape{5}, Shape{1}, Shape{3, 2}, Shape{2, 3, 4}, Shape{2, 1, 3, 2}}) {
    const DenseTensor t = random_tensor(shape, rng);
    for (std::size_t k = 0; k < shape.size(); ++k) {
      EXPECT_EQ(tensorize(matricize(t, k), k, shape), t);
    }
  }
}

TEST(Tensorize, ShapeChecks) {
  const Matrix m = Matrix::Zero(3, 8);
  EXPECT_EQ(tensorize(m, 1, {2, 3, 4}).shape(), (Shape{2, 3, 4}));
  EXPECT_THROW((void)tensorize(m, 0, {2, 3, 4}), ShapeError);
}

TEST(ModeProduct, IdentityLeavesTensorUnchanged) {
  Rng rng(2);
  const DenseTensor t = random_tensor({3, 4, 2}, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(mode_product(t, Matrix::Identity(static_cast<Eigen::Index>(t.dim(k)), static_cast<Eigen::Index>(t.dim(k))), k), t);
  }
}

TEST(ModeProduct, SummationExample) {
  const DenseTensor ones({2, 2}, 1.0);
  Matrix b(1, 2);
  b << 1, 1;
  const DenseTensor r = mode_product(ones, b, 0);
  EXPECT_EQ(r.shape(), (Shape{1, 2}));
  EXPECT_EQ(r[0], 2.0);
  EXPECT_EQ(r[1], 2.0);
}

TEST(ModeProduct, MatchesIndexLoop) {
  Rng rng(3);
  const DenseTensor t = random_tensor({3, 4, 5}, rng, -1, 1);
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix b = random_matrix(2, t.dim(k), rng, -1, 1);
    EXPECT_LT(max_abs_diff(mode_product(t, b, k), wtf::testing::loop_mode_product(t, b, k)), 1e-12);
    const Shape new_shape = [&] {
      Shape s = t.shape();
      s[k] = 2;
      return s;
    }();
    EXPECT_LT(max_abs_diff(mode_product(t, b, k), tensorize(b * matricize(t, k), k, new_shape)), 1e-12);
  }
  EXPECT_THROW((void)mode_product(t, Matrix::Zero(2, 3), 1), ShapeError);
}

TEST(MultiModeProduct, OrderIndependentAndIdentity) {
  Rng rng(4);
  const DenseTensor t = random_tensor({3, 4, 2}, rng);
  const Matrix b0 = random_matrix(2, 3, rng);
  const Matrix b1 = random_matrix(5, 4, rng);
  const std::vector<ModeMatrix> forward{{0, b0}, {1, b1}};
  const std::vector<ModeMatrix> backward{{1, b1}, {0, b0}};
  EXPECT_LT(max_abs_diff(multi_mode_product(t, forward), multi_mode_product(t, backward)), 1e-12);
  EXPECT_LT(max_abs_diff(multi_mode_product(t, forward), mode_product(mode_product(t, b1, 1), b0, 0)), 1e-12);
  EXPECT_EQ(multi_mode_product(t, std::vector<ModeMatrix>{}), t);
  const Matrix i3 = Matrix::Identity(3, 3);
  const Matrix i4 = Matrix::Identity(4, 4);
  const Matrix i2 = Matrix::Identity(2, 2);
  EXPECT_EQ(multi_mode_product(t, std::vector<ModeMatrix>{{0, i3}, {1, i4}, {2, i2}}), t);
  EXPECT_THROW((void)multi_mode_product(t, std::vector<ModeMatrix>{{0, b0}, {0, b0}}), ShapeError);
}

TEST(TuckerReconstruct, IndicatorFromUnitVectors) {
  const DenseTensor core({1, 1, 1}, 1.0);
  std::vector<Matrix> factors(3, Matrix::Zero(3, 1));
  for (auto& f : factors) f(0, 0) = 1.0;
  const DenseTensor x = tucker_reconstruct(core, factors);
  EXPECT_EQ(x.sum(), 1.0);
  EXPECT_EQ(x.at({0, 0, 0}), 1.0);
}

TEST(TuckerReconstruct, IdentityFactorsReturnCore) {
  Rng rng(5);
  const DenseTensor core = random_tensor({2, 3, 4}, rng);
  std::vector<Matrix> factors{Matrix::Identity(2, 2), Matrix::Identity(3, 3), Matrix::Identity(4, 4)};
  EXPECT_EQ(tucker_reconstruct(core, factors), core);
}

TEST(TuckerReconstruct, MatchesOuterProductSum) {
  Rng rng(6);
  const DenseTensor core = random_tensor({2, 2, 2}, rng);
  const std::vector<Matrix> factors{random_matrix(3, 2, rng), random_matrix(4, 2, rng), random_matrix(2, 2, rng)};
  EXPECT_LT(max_abs_diff(tucker_reconstruct(core, factors), wtf::testing::loop_tucker(core, factors)), 1e-12);
  EXPECT_THROW((void)tucker_reconstruct(core, std::vector<Matrix>{factors[0], factors[1]}), ShapeError);
  EXPECT_THROW((void)tucker_reconstruct(core, std::vector<Matrix>{factors[0], factors[1], random_matrix(2, 3, rng)}), ShapeError);
}

TEST(CpReconstruct, MatrixCaseIsNmfProduct) {
  Rng rng(7);
  const Matrix a = random_matrix(4, 2, rng);
  const Matrix b = random_matrix(3, 2, rng);
  EXPECT_LT((cp_reconstruct(std::vector<Matrix>{a, b}).to_matrix() - a * b.transpose()).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(CpReconstruct, RankOneIsOuterProduct) {
  Matrix a(2, 1);
  Matrix b(3, 1);
  a << 1, 2;
  b << 3, 4, 5;
  const DenseTensor x = cp_reconstruct(std::vector<Matrix>{a, b});
  EXPECT_EQ(x.at({1, 2}), 10.0);
}

TEST(CpReconstruct, EqualsTuckerWithSuperdiagonalCore) {
  Rng rng(8);
  const std::vector<Matrix> factors{random_matrix(3, 2, rng), random_matrix(3, 2, rng), random_matrix(3, 2, rng)};
  EXPECT_LT(max_abs_diff(cp_reconstruct(factors), tucker_reconstruct(superdiagonal(2, 3), factors)), 1e-12);
  EXPECT_THROW((void)cp_reconstruct(std::vector<Matrix>{random_matrix(3, 2, rng), random_matrix(3, 1, rng)}), ShapeError);
}

TEST(Slices, ExtractAndAssign) {
  Rng rng(9);
  DenseTensor t = random_tensor({2, 3, 4}, rng);
  const DenseTensor s = extract_slice(t, 1, 2);
  EXPECT_EQ(s.shape(), (Shape{2, 4}));
  EXPECT_EQ(s.at({1, 3}), t.at({1, 2, 3}));
  DenseTensor z(s.shape(), 7.0);
  assign_slice(t, 1, 2, z);
  EXPECT_EQ(t.at({0, 2, 1}), 7.0);
  EXPECT_EQ(extract_slice(DenseTensor({3}, 1.0), 0, 1).shape(), (Shape{1}));
}

TEST(InnerProduct, Basics) {
  Rng rng(10);
  const DenseTensor t = random_tensor({2, 2}, rng);
  EXPECT_EQ(inner_product(t, DenseTensor({2, 2})), 0.0);
  EXPECT_EQ(inner_product(DenseTensor({2, 2}, 1.0), DenseTensor({2, 2}, 1.0)), 4.0);
  EXPECT_THROW((void)inner_product(t, DenseTensor({4})), ShapeError);
}

TEST(InnerProduct, ModeProductAdjointIdentity) {
  Rng rng(11);
  for (std::size_t k = 0; k < 3; ++k) {
    const DenseTensor b = random_tensor({3, 4, 5}, rng, -1, 1);
    const Matrix c = random_matrix(2, b.dim(k), rng, -1, 1);
    Shape s = b.shape();
    s[k] = 2;
    const DenseTensor a = random_tensor(s, rng, -1, 1);
    EXPECT_NEAR(inner_product(a, mode_product(b, c, k)),
                inner_product(mode_product(a, c.transpose(), k), b), 1e-12);
  }
}

TEST(Purity, InputsAreNotMutated) {
  Rng rng(12);
  const DenseTensor t = random_tensor({2, 3}, rng);
  const DenseTensor copy = t;
  (void)mode_product(t, random_matrix(2, 3, rng), 1);
  (void)matricize(t, 1);
  (void)extract_slice(t, 0, 1);
  EXPECT_EQ(t, copy);
}
