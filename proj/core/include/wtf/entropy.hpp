#pragma once

#include "wtf/ot.hpp"
#include "wtf/tensor.hpp"

#include <string>
#include <string_view>

namespace wtf {

/// Normalisation constraint folded into an entropy barrier. Row and column
/// variants apply to 2-mode tensors (matrices) only.
enum class Constraint { Unconstrained, FullSimplex, RowSimplex, ColumnSimplex };

[[nodiscard]] std::string_view to_string(Constraint c);
/// Parses "unconstrained", "full_simplex", "row_simplex", "column_simplex".
[[nodiscard]] Constraint parse_constraint(std::string_view name);

/// E(x) = <x, log x - 1>, with 0 log 0 = 0.
[[nodiscard]] double entropy(const DenseTensor& x);

/// Legendre transform of E restricted to the constraint set, with the
/// additive constants dropped: sum(exp V) for the unconstrained barrier and
/// log-sum-exp over the whole tensor, each row, or each column otherwise.
/// The gradient is the matching softmax, i.e. the maximiser.
[[nodiscard]] Conjugate entropy_conjugate(const DenseTensor& v, Constraint c);

/// Maximiser of <x, V> - E_c(x): exp(V) normalised to satisfy `c`.
[[nodiscard]] DenseTensor primal_recover(const DenseTensor& v, Constraint c);

/// Largest absolute violation of the constraint's normalisation.
[[nodiscard]] double constraint_violation(const DenseTensor& x, Constraint c);

/// Rescales a positive tensor onto the constraint set.
[[nodiscard]] DenseTensor project_to_constraint(const DenseTensor& x, Constraint c);

}  // namespace wtf
