#pragma once

#include "wtf/datagen.hpp"
#include "wtf/solver.hpp"
#include "wtf/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wtf {

// WTF1 text tensor format:
//   wtf-tensor v1
//   n_1 n_2 ... n_d
//   v_0 v_1 ... (row-major, 17 significant digits)

void write_tensor(const DenseTensor& t, const std::filesystem::path& path);
/// Throws FormatError naming the problem (magic, shape, count, payload).
[[nodiscard]] DenseTensor read_tensor(const std::filesystem::path& path);
[[nodiscard]] DenseTensor parse_tensor(std::string_view text);
[[nodiscard]] std::string format_tensor(const DenseTensor& t);

/// Comma-separated rows, 17 significant digits.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
[[nodiscard]] Matrix read_matrix_csv(const std::filesystem::path& path);

/// Writes factor_1.csv .. factor_d.csv, core.wtf and model.json into `dir`
/// (created if needed).
void export_model(const TuckerModel& model, const std::filesystem::path& dir);
[[nodiscard]] TuckerModel import_model(const std::filesystem::path& dir);

/// CSV with header sweep,block,dual_value,grad_norm,primal_objective,seconds.
/// Blocks are labelled S, A1, ..., Ad; unmonitored objectives are empty.
void export_trace(const SolveTrace& trace, const std::filesystem::path& path);

enum class Recipe { Mixture, ShiftedSlices };

/// Synthetic dataset description.
struct DatasetSpec {
  Recipe recipe = Recipe::Mixture;
  std::size_t n = 32;
  double a = 0.0;
  double b = 1.0;
  std::uint64_t seed = 0;
  // Mixture: components[i][k] is the mode-k atom of component i.
  std::size_t order = 3;
  std::vector<std::vector<AtomSpec>> components;
  std::vector<double> weights;
  std::size_t samples = 20000;
  // ShiftedSlices.
  std::vector<AtomPair> pairs;
  std::size_t n_slices = 100;
  double shift_std = 0.05;
};

/// Default mixture components: the three default atoms, rotated by one
/// position per mode so that components are not diagonal copies.
[[nodiscard]] std::vector<std::vector<AtomSpec>> default_components(std::size_t n,
                                                                    std::size_t order, double a,
                                                                    double b);
[[nodiscard]] std::vector<AtomPair> default_pairs(std::size_t n, double a, double b);

struct Dataset {
  DenseTensor tensor;
  /// Ground-truth atoms per mode (columns normalised); empty when unknown.
  std::vector<Matrix> truth;
};

/// Empty components, weights or pairs fall back to the defaults above.
[[nodiscard]] Dataset generate_dataset(const DatasetSpec& spec);

/// Per-mode ground cost |x_i - x_j|^p on linspace(a, b, n_k).
struct CostSpec {
  double p = 2.0;
  bool normalize = true;
  double a = 0.0;
  double b = 1.0;
};

struct LossConfig {
  LossMode mode = LossMode::ProductTensor;
  std::size_t slice_axis = 0;
  double epsilon = 0.01;
  double lambda = kBalanced;
  CostSpec cost;
};

struct RunConfig {
  std::optional<DatasetSpec> dataset;
  LossConfig loss;
  /// Everything but solver.loss, which depends on the data shape.
  SolverConfig solver;
};

/// Parses a JSON run configuration. Unknown keys, wrong types and invalid
/// values throw ValidationError with a message naming the key.
[[nodiscard]] RunConfig parse_run_config(std::string_view json_text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

[[nodiscard]] LossSpec build_loss(const LossConfig& loss, const Shape& data_shape);
/// The solver configuration for data of the given shape, validated.
[[nodiscard]] SolverConfig solver_config(const RunConfig& cfg, const Shape& data_shape);

}  // namespace wtf
