#include "wtf/entropy.hpp"

#include "wtf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wtf {

namespace {

// A constraint partitions the entries into groups that are normalised
// independently. Entry (group, member) lives at flat index
// group * group_stride + member * member_stride.
struct Grouping {
  std::size_t groups;
  std::size_t members;
  std::size_t group_stride;
  std::size_t member_stride;
};

Grouping grouping(const Shape& shape, Constraint c) {
  const std::size_t total = shape_volume(shape);
  switch (c) {
    case Constraint::FullSimplex:
      return {1, total, 0, 1};
    case Constraint::RowSimplex:
    case Constraint::ColumnSimplex: {
      if (shape.size() != 2) {
        throw ValidationError(std::string(to_string(c)) +
                              " constraint applies to matrices only, got a tensor of order " +
                              std::to_string(shape.size()));
      }
      if (c == Constraint::RowSimplex) return {shape[0], shape[1], shape[1], 1};
      return {shape[1], shape[0], 1, shape[1]};
    }
    case Constraint::Unconstrained:
      break;
  }
  return {total, 1, 1, 1};
}

// Floor for recovered entries; keeps blocks strictly positive when exp underflows.
constexpr double kTiny = std::numeric_limits<double>::min();

void check_finite(const DenseTensor& v) {
  for (double x : v.data()) {
    if (!std::isfinite(x)) throw ValidationError("entropy: non-finite argument");
  }
}

}  // namespace

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::Unconstrained: return "unconstrained";
    case Constraint::FullSimplex: return "full_simplex";
    case Constraint::RowSimplex: return "row_simplex";
    case Constraint::ColumnSimplex: return "column_simplex";
  }
  return "unknown";
}

Constraint parse_constraint(std::string_view name) {
  for (auto c : {Constraint::Unconstrained, Constraint::FullSimplex, Constraint::RowSimplex,
                 Constraint::ColumnSimplex}) {
    if (name == to_string(c)) return c;
  }
  throw ValidationError("unknown constraint name '" + std::string(name) + "'");
}

double entropy(const DenseTensor& x) {
  double e = 0.0;
  for (double v : x.data()) {
    if (v > 0.0) e += v * (std::log(v) - 1.0);
  }
  return e;
}

Conjugate entropy_conjugate(const DenseTensor& v, Constraint c) {
  check_finite(v);
  if (c == Constraint::Unconstrained) {
    DenseTensor grad(v.shape());
    grad.vec() = v.vec().array().exp().max(kTiny).matrix();
    return {grad.sum(), std::move(grad)};
  }
  const auto g = grouping(v.shape(), c);
  DenseTensor grad(v.shape());
  double value = 0.0;
  for (std::size_t k = 0; k < g.groups; ++k) {
    const std::size_t base = k * g.group_stride;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.members; ++j) m = std::max(m, v[base + j * g.member_stride]);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.members; ++j) {
      const std::size_t idx = base + j * g.member_stride;
      grad[idx] = std::exp(v[idx] - m);
      acc += grad[idx];
    }
    for (std::size_t j = 0; j < g.members; ++j) {
      auto& x = grad[base + j * g.member_stride];
      x = std::max(x / acc, kTiny);
    }
    value += m + std::log(acc);
  }
  return {value, std::move(grad)};
}

DenseTensor primal_recover(const DenseTensor& v, Constraint c) {
  return entropy_conjugate(v, c).grad;
}

double constraint_violation(const DenseTensor& x, Constraint c) {
  if (c == Constraint::Unconstrained) return 0.0;
  const auto g = grouping(x.shape(), c);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.groups; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.members; ++j) acc += x[k * g.group_stride + j * g.member_stride];
    worst = std::max(worst, std::abs(acc - 1.0));
  }
  return worst;
}

DenseTensor project_to_constraint(const DenseTensor& x, Constraint c) {
  if (c == Constraint::Unconstrained) return x;
  const auto g = grouping(x.shape(), c);
  DenseTensor out = x;
  for (std::size_t k = 0; k < g.groups; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.members; ++j) acc += x[k * g.group_stride + j * g.member_stride];
    if (!(acc > 0.0)) throw ValidationError("project_to_constraint: group with zero mass");
    for (std::size_t j = 0; j < g.members; ++j) out[k * g.group_stride + j * g.member_stride] /= acc;
  }
  return out;
}

}  // namespace wtf
