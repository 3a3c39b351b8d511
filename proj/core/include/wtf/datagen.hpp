#pragma once

#include "wtf/ot.hpp"
#include "wtf/solver.hpp"
#include "wtf/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wtf {

/// Discretised Gaussian on linspace(a, b, n).
struct AtomSpec {
  std::size_t n = 32;
  double a = 0.0;
  double b = 1.0;
  double mean = 0.5;
  double std = 0.05;
};

/// Gaussian density sampled on the grid and normalised to sum 1.
[[nodiscard]] Vector gaussian_atom(const AtomSpec& spec);

/// Implementation defaults for synthetic atoms: means at 25%, 50% and 75% of
/// [a, b], standard deviation 5% of its width.
[[nodiscard]] std::vector<AtomSpec> default_atoms(std::size_t n, double a = 0.0, double b = 1.0);

/// sum_i w_i * atoms[i][0] (x) ... (x) atoms[i][d-1].
[[nodiscard]] DenseTensor separable_mixture(const std::vector<std::vector<Vector>>& atoms,
                                            const std::vector<double>& weights);

/// Histogram of N categorical draws from a normalised tensor, divided by N.
[[nodiscard]] DenseTensor empirical_sample(const DenseTensor& x_true, std::size_t samples,
                                           std::uint64_t seed);

/// One pair of ground-truth atoms (one per image axis) for the translated
/// slice dataset.
struct AtomPair {
  AtomSpec row;
  AtomSpec col;
};

/// n_slices x n x n tensor. Slice i is sum_k row_k (x) col_k with each atom
/// mean shifted by an independent Normal(0, shift_std) draw, normalised to 1.
[[nodiscard]] DenseTensor shifted_slice_dataset(const std::vector<AtomPair>& base,
                                                std::size_t n_slices, double shift_std,
                                                std::uint64_t seed);

struct AtomMatch {
  /// assignment[j] is the learned column paired with truth column j.
  std::vector<std::size_t> assignment;
  /// distances[j] = TV(learned[:, assignment[j]], truth[:, j]).
  std::vector<double> distances;
  /// Greedy matching was used (more than six atoms).
  bool greedy = false;

  [[nodiscard]] double worst() const;
};

/// TV(p, q) = 0.5 * sum |p - q|.
[[nodiscard]] double tv_distance(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q);

/// Minimum total-TV one-to-one matching of atom columns. Exhaustive for up to
/// six atoms, greedy beyond.
[[nodiscard]] AtomMatch atom_match_score(const Matrix& learned, const Matrix& truth);

/// Columns rescaled to sum 1 (zero columns are left untouched).
[[nodiscard]] Matrix normalize_columns(const Matrix& m);

struct ReconstructionMetrics {
  double frobenius_rel_error = 0.0;
  SinkhornResult monitored_loss;
};

[[nodiscard]] ReconstructionMetrics reconstruction_metrics(const DenseTensor& x,
                                                           const TuckerModel& model,
                                                           const LossSpec& loss,
                                                           const SinkhornOptions& options = {});

}  // namespace wtf
