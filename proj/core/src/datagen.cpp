#include "wtf/datagen.hpp"

#include "wtf/error.hpp"
#include "wtf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wtf {

Vector gaussian_atom(const AtomSpec& spec) {
  if (spec.n < 2) throw ValidationError("atom grid needs at least 2 points");
  if (!(spec.std > 0.0)) throw ValidationError("atom std must be positive");
  if (!(spec.b > spec.a)) throw ValidationError("atom domain must satisfy a < b");
  Vector v(static_cast<Eigen::Index>(spec.n));
  const double step = (spec.b - spec.a) / static_cast<double>(spec.n - 1);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double z = (spec.a + step * static_cast<double>(i) - spec.mean) / spec.std;
    v(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * z * z);
  }
  const double total = v.sum();
  if (!(total > 0.0)) throw ValidationError("atom has no mass on the grid");
  return v / total;
}

std::vector<AtomSpec> default_atoms(std::size_t n, double a, double b) {
  const double width = b - a;
  std::vector<AtomSpec> out;
  for (double q : {0.25, 0.5, 0.75}) out.push_back({n, a, b, a + q * width, 0.05 * width});
  return out;
}

DenseTensor separable_mixture(const std::vector<std::vector<Vector>>& atoms,
                              const std::vector<double>& weights) {
  if (atoms.empty()) throw ShapeError("separable_mixture: no components");
  if (atoms.size() != weights.size()) {
    throw ShapeError("separable_mixture: " + std::to_string(atoms.size()) + " components but " +
                     std::to_string(weights.size()) + " weights");
  }
  const std::size_t d = atoms.front().size();
  if (d == 0) throw ShapeError("separable_mixture: components have no modes");
  Shape shape;
  for (const auto& v : atoms.front()) shape.push_back(static_cast<std::size_t>(v.size()));
  std::vector<Matrix> factors(d);
  for (std::size_t k = 0; k < d; ++k) {
    factors[k].resize(static_cast<Eigen::Index>(shape[k]), static_cast<Eigen::Index>(atoms.size()));
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != d) throw ShapeError("separable_mixture: components differ in order");
    if (weights[i] < 0.0) throw ValidationError("separable_mixture: negative weight");
    for (std::size_t k = 0; k < d; ++k) {
      if (static_cast<std::size_t>(atoms[i][k].size()) != shape[k]) {
        throw ShapeError("separable_mixture: atom length mismatch on mode " + std::to_string(k));
      }
      factors[k].col(static_cast<Eigen::Index>(i)) = atoms[i][k];
    }
    factors[0].col(static_cast<Eigen::Index>(i)) *= weights[i];
  }
  return cp_reconstruct(factors);
}

DenseTensor empirical_sample(const DenseTensor& x_true, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ValidationError("empirical_sample: sample count must be positive");
  std::vector<double> cdf(x_true.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x_true.size(); ++i) {
    if (!(x_true[i] >= 0.0)) throw ValidationError("empirical_sample: negative probability");
    acc += x_true[i];
    cdf[i] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9) {
    throw ValidationError("empirical_sample: distribution must sum to 1");
  }
  std::vector<std::size_t> counts(x_true.size(), 0);
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // u < acc, so the draw lands in range; clamp guards the last cell anyway.
    auto idx = static_cast<std::size_t>(it - cdf.begin());
    idx = std::min(idx, cdf.size() - 1);
    while (x_true[idx] == 0.0 && idx + 1 < cdf.size()) ++idx;
    ++counts[idx];
  }
  DenseTensor out(x_true.shape());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(samples);
  }
  return out;
}

DenseTensor shifted_slice_dataset(const std::vector<AtomPair>& base, std::size_t n_slices,
                                  double shift_std, std::uint64_t seed) {
  if (base.empty()) throw ValidationError("shifted_slice_dataset: no ground-truth atoms");
  if (n_slices == 0) throw ValidationError("shifted_slice_dataset: n_slices must be positive");
  if (shift_std < 0.0) throw ValidationError("shifted_slice_dataset: shift_std must be >= 0");
  const std::size_t n = base.front().row.n;
  for (const auto& p : base) {
    if (p.row.n != n || p.col.n != n) {
      throw ValidationError("shifted_slice_dataset: all atoms must share one grid size");
    }
  }
  Rng rng(seed);
  DenseTensor out({n_slices, n, n});
  for (std::size_t i = 0; i < n_slices; ++i) {
    Matrix slice = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& p : base) {
      AtomSpec row = p.row;
      AtomSpec col = p.col;
      row.mean += rng.normal(0.0, shift_std);
      col.mean += rng.normal(0.0, shift_std);
      slice.noalias() += gaussian_atom(row) * gaussian_atom(col).transpose();
    }
    slice /= slice.sum();
    assign_slice(out, 0, i, DenseTensor::from_matrix(slice));
  }
  return out;
}

double AtomMatch::worst() const {
  return distances.empty() ? 0.0 : *std::max_element(distances.begin(), distances.end());
}

double tv_distance(const Eigen::Ref<const Vector>& p, const Eigen::Ref<const Vector>& q) {
  if (p.size() != q.size()) throw ShapeError("tv_distance: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

AtomMatch atom_match_score(const Matrix& learned, const Matrix& truth) {
  if (learned.cols() != truth.cols()) {
    throw ShapeError("atom_match_score: " + std::to_string(learned.cols()) +
                     " learned atoms vs " + std::to_string(truth.cols()) + " true atoms");
  }
  if (learned.rows() != truth.rows()) throw ShapeError("atom_match_score: atom length mismatch");
  const auto r = static_cast<std::size_t>(truth.cols());
  Matrix tv(truth.cols(), truth.cols());  // tv(j, i): truth j vs learned i
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    for (Eigen::Index i = 0; i < learned.cols(); ++i) tv(j, i) = tv_distance(learned.col(i), truth.col(j));
  }

  AtomMatch out;
  out.assignment.resize(r);
  if (r <= 6) {
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (std::size_t j = 0; j < r; ++j) {
        total += tv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(perm[j]));
      }
      if (total < best) {
        best = total;
        out.assignment = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    out.greedy = true;
    std::vector<bool> row_used(r, false);
    std::vector<bool> col_used(r, false);
    for (std::size_t step = 0; step < r; ++step) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t bj = 0;
      std::size_t bi = 0;
      for (std::size_t j = 0; j < r; ++j) {
        if (row_used[j]) continue;
        for (std::size_t i = 0; i < r; ++i) {
          const double v = tv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
          if (!col_used[i] && v < best) {
            best = v;
            bj = j;
            bi = i;
          }
        }
      }
      row_used[bj] = true;
      col_used[bi] = true;
      out.assignment[bj] = bi;
    }
  }
  for (std::size_t j = 0; j < r; ++j) {
    out.distances.push_back(tv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(out.assignment[j])));
  }
  return out;
}

Matrix normalize_columns(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double s = out.col(j).sum();
    if (s != 0.0) out.col(j) /= s;
  }
  return out;
}

ReconstructionMetrics reconstruction_metrics(const DenseTensor& x, const TuckerModel& model,
                                             const LossSpec& loss,
                                             const SinkhornOptions& options) {
  const DenseTensor x_hat = model.reconstruct();
  if (x_hat.shape() != x.shape()) throw ShapeError("reconstruction_metrics: shape mismatch");
  DenseTensor diff = x;
  diff.vec() -= x_hat.vec();
  const double norm = frobenius_norm(x);
  ReconstructionMetrics out;
  out.frobenius_rel_error = norm > 0.0 ? frobenius_norm(diff) / norm : frobenius_norm(diff);
  out.monitored_loss = monitored_loss(x, x_hat, loss, options);
  return out;
}

}  // namespace wtf
