#include "oracles.hpp"

#include "wtf/datagen.hpp"
#include "wtf/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace wtf;
using wtf::testing::all_indices;
using wtf::testing::random_matrix;

TEST(GaussianAtom, NormalisedSymmetricAndPeaked) {
  const Vector g = gaussian_atom({33, 0.0, 1.0, 0.5, 0.1});
  EXPECT_NEAR(g.sum(), 1.0, 1e-15);
  Eigen::Index peak = 0;
  g.maxCoeff(&peak);
  EXPECT_EQ(peak, 16);
  for (Eigen::Index i = 0; i < 33; ++i) EXPECT_NEAR(g(i), g(32 - i), 1e-15);
}

TEST(GaussianAtom, RejectsBadSpecs) {
  EXPECT_THROW((void)gaussian_atom({1, 0.0, 1.0, 0.5, 0.1}), ValidationError);
  EXPECT_THROW((void)gaussian_atom({8, 0.0, 1.0, 0.5, 0.0}), ValidationError);
  EXPECT_THROW((void)gaussian_atom({8, 1.0, 1.0, 0.5, 0.1}), ValidationError);
}

TEST(DefaultAtoms, QuartilesOfTheDomain) {
  const auto atoms = default_atoms(32, -1.0, 1.0);
  ASSERT_EQ(atoms.size(), 3u);
  EXPECT_DOUBLE_EQ(atoms[0].mean, -0.5);
  EXPECT_DOUBLE_EQ(atoms[1].mean, 0.0);
  EXPECT_DOUBLE_EQ(atoms[2].mean, 0.5);
  EXPECT_DOUBLE_EQ(atoms[0].std, 0.1);
}

TEST(SeparableMixture, MatchesWeightedOuterProducts) {
  Rng rng(1);
  std::vector<std::vector<Vector>> atoms(2);
  for (auto& c : atoms) {
    c.push_back(random_matrix(3, 1, rng).col(0));
    c.push_back(random_matrix(4, 1, rng).col(0));
    c.push_back(random_matrix(2, 1, rng).col(0));
  }
  const std::vector<double> w{0.3, 0.7};
  const DenseTensor x = separable_mixture(atoms, w);
  EXPECT_EQ(x.shape(), (Shape{3, 4, 2}));
  for (const auto& i : all_indices(x.shape())) {
    double expected = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      expected += w[c] * atoms[c][0](static_cast<Eigen::Index>(i[0])) *
                  atoms[c][1](static_cast<Eigen::Index>(i[1])) * atoms[c][2](static_cast<Eigen::Index>(i[2]));
    }
    EXPECT_NEAR(x.at({i[0], i[1], i[2]}), expected, 1e-15);
  }
  EXPECT_THROW((void)separable_mixture(atoms, {1.0}), ShapeError);
  EXPECT_THROW((void)separable_mixture(atoms, {-0.5, 1.5}), ValidationError);
}

TEST(EmpiricalSample, CountsOverSampleSize) {
  const Vector g = gaussian_atom({16, 0.0, 1.0, 0.4, 0.15});
  const DenseTensor truth = separable_mixture({{g, g}}, {1.0});
  const std::size_t n = 5000;
  const DenseTensor x = empirical_sample(truth, n, 3);
  EXPECT_NEAR(x.sum(), 1.0, 1e-12);
  for (double v : x.data()) EXPECT_NEAR(v * n, std::round(v * n), 1e-9);
  EXPECT_EQ(empirical_sample(truth, n, 3), x);
  EXPECT_NE(empirical_sample(truth, n, 4), x);
  // Expected TV is O(sqrt(cells / N)); 256 cells and 200k draws gives ~0.03.
  const DenseTensor big = empirical_sample(truth, 200000, 5);
  EXPECT_LT(0.5 * (big.vec() - truth.vec()).cwiseAbs().sum(), 0.05);
}

TEST(EmpiricalSample, RejectsInvalidInput) {
  const DenseTensor t({2}, 0.5);
  EXPECT_THROW((void)empirical_sample(t, 0, 1), ValidationError);
  EXPECT_THROW((void)empirical_sample(DenseTensor({2}, 0.3), 10, 1), ValidationError);
  EXPECT_THROW((void)empirical_sample(DenseTensor({2}, std::vector<double>{1.5, -0.5}), 10, 1), ValidationError);
}

TEST(ShiftedSlices, UnitMassSlicesAndDeterminism) {
  const std::vector<AtomPair> base{{{16, 0.0, 1.0, 0.3, 0.05}, {16, 0.0, 1.0, 0.7, 0.05}},
                                   {{16, 0.0, 1.0, 0.7, 0.05}, {16, 0.0, 1.0, 0.3, 0.05}}};
  const DenseTensor x = shifted_slice_dataset(base, 7, 0.05, 11);
  EXPECT_EQ(x.shape(), (Shape{7, 16, 16}));
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(extract_slice(x, 0, i).sum(), 1.0, 1e-12);
  EXPECT_EQ(shifted_slice_dataset(base, 7, 0.05, 11), x);
  // Without shifts every slice is the same normalised sum of outer products.
  const DenseTensor still = shifted_slice_dataset(base, 3, 0.0, 11);
  EXPECT_EQ(extract_slice(still, 0, 0), extract_slice(still, 0, 2));
  const Vector r0 = gaussian_atom(base[0].row);
  const Vector c0 = gaussian_atom(base[0].col);
  const Vector r1 = gaussian_atom(base[1].row);
  const Vector c1 = gaussian_atom(base[1].col);
  EXPECT_NEAR(still.at({1, 4, 11}), 0.5 * (r0(4) * c0(11) + r1(4) * c1(11)), 1e-15);
  EXPECT_THROW((void)shifted_slice_dataset(base, 0, 0.05, 1), ValidationError);
}

TEST(TvDistance, Basics) {
  Vector p(3);
  Vector q(3);
  p << 1, 0, 0;
  q << 0, 0.5, 0.5;
  EXPECT_DOUBLE_EQ(tv_distance(p, q), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance(p, p), 0.0);
  EXPECT_THROW((void)tv_distance(p, Vector::Zero(2)), ShapeError);
}

TEST(AtomMatch, RecoversPermutation) {
  Rng rng(2);
  const Matrix truth = normalize_columns(random_matrix(10, 4, rng));
  Matrix learned(10, 4);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  for (std::size_t j = 0; j < 4; ++j) learned.col(static_cast<Eigen::Index>(perm[j])) = truth.col(static_cast<Eigen::Index>(j));
  const auto m = atom_match_score(learned, truth);
  EXPECT_EQ(m.assignment, perm);
  EXPECT_FALSE(m.greedy);
  EXPECT_DOUBLE_EQ(m.worst(), 0.0);
  EXPECT_THROW((void)atom_match_score(learned.leftCols(3), truth), ShapeError);
}

TEST(AtomMatch, MinimisesTotalDistance) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix truth = normalize_columns(random_matrix(6, 3, rng));
    const Matrix learned = normalize_columns(random_matrix(6, 3, rng));
    const auto m = atom_match_score(learned, truth);
    double total = 0.0;
    for (double v : m.distances) total += v;
    double best = 1e300;
    std::vector<std::size_t> perm{0, 1, 2};
    do {
      double t = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        t += 0.5 * (learned.col(static_cast<Eigen::Index>(perm[j])) - truth.col(static_cast<Eigen::Index>(j))).cwiseAbs().sum();
      }
      best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(total, best, 1e-14);
  }
}

TEST(AtomMatch, GreedyBeyondSixAtoms) {
  const Matrix truth = Matrix::Identity(8, 8);
  const auto m = atom_match_score(truth, truth);
  EXPECT_TRUE(m.greedy);
  EXPECT_DOUBLE_EQ(m.worst(), 0.0);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(m.assignment[j], j);
}

TEST(NormalizeColumns, UnitSumsAndZeroColumns) {
  Matrix m(2, 3);
  m << 1, 0, 2,
       3, 0, 2;
  const Matrix n = normalize_columns(m);
  EXPECT_DOUBLE_EQ(n(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(n(1, 2), 0.5);
  EXPECT_EQ(n.col(1).sum(), 0.0);
}

TEST(ReconstructionMetrics, ExactModelHasZeroError) {
  Rng rng(3);
  TuckerModel model;
  model.core = superdiagonal(2, 2);
  model.core_fixed = true;
  model.factors = {normalize_columns(random_matrix(4, 2, rng, 0.1, 1.0)),
                   normalize_columns(random_matrix(4, 2, rng, 0.1, 1.0))};
  model.factor_constraints = {Constraint::ColumnSimplex, Constraint::ColumnSimplex};
  const DenseTensor x = model.reconstruct();
  LossSpec loss;
  loss.lambda = 5.0;
  loss.kernel = gibbs_kernel({build_grid_cost(4, 0, 1, 2, true), build_grid_cost(4, 0, 1, 2, true)}, 0.5);
  const auto m = reconstruction_metrics(x, model, loss);
  EXPECT_EQ(m.frobenius_rel_error, 0.0);
  EXPECT_TRUE(m.monitored_loss.converged);
  DenseTensor off = x;
  off.vec() *= 2.0;
  EXPECT_NEAR(reconstruction_metrics(off, model, loss).frobenius_rel_error, 0.5, 1e-14);
}
