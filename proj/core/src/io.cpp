#include "wtf/io.hpp"

#include "wtf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wtf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kMagic = "wtf-tensor v1";

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_real(const std::string& token, double& out) {
  errno = 0;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  // Underflow to a subnormal is fine; overflow, inf and nan are not.
  return end != token.c_str() && *end == '\0' && std::isfinite(out);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError("write to " + path.string() + " failed");
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string getline_or_throw(std::istringstream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string("WTF1: missing ") + what + " line");
  return trim(line);
}

// --- config helpers --------------------------------------------------------

// Rejects keys outside `allowed` for the object at `where`.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

double get_real(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& obj, const char* key, const std::string& where,
                      std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ValidationError(where + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ValidationError(where + "." + key + ": expected true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ValidationError(where + "." + key + ": expected a string");
  return obj.at(key).get<std::string>();
}

// A scalar or a list of values.
template <class T, class F>
std::vector<T> get_list(const json& obj, const char* key, const std::string& where, F convert,
                        std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) throw ValidationError(where + "." + key + ": list must not be empty");
    for (const auto& e : v) out.push_back(convert(e, where + "." + key));
  } else {
    out.push_back(convert(v, where + "." + key));
  }
  return out;
}

double to_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

std::size_t to_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ValidationError(where + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

Constraint to_constraint(const json& v, const std::string& where) {
  if (!v.is_string()) throw ValidationError(where + ": expected a constraint name");
  try {
    return parse_constraint(v.get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

void get_domain(const json& obj, const std::string& where, double& a, double& b) {
  if (!obj.contains("domain")) return;
  const auto& v = obj.at("domain");
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(where + ".domain: expected [a, b]");
  }
  a = v[0].get<double>();
  b = v[1].get<double>();
  if (!(a < b)) throw ValidationError(where + ".domain: need a < b");
}

AtomSpec parse_atom(const json& v, const std::string& where, std::size_t n, double a, double b) {
  check_keys(v, where, {"mean", "std"});
  if (!v.contains("mean") || !v.contains("std")) {
    throw ValidationError(where + ": atoms need both 'mean' and 'std'");
  }
  AtomSpec atom{n, a, b, get_real(v, "mean", where, 0.0), get_real(v, "std", where, 0.0)};
  if (!(atom.std > 0.0)) throw ValidationError(where + ".std: must be positive");
  return atom;
}

DatasetSpec parse_dataset(const json& v) {
  const std::string where = "dataset";
  check_keys(v, where, {"recipe", "n", "domain", "seed", "order", "components", "weights",
                        "samples", "pairs", "n_slices", "shift_std"});
  DatasetSpec spec;
  const std::string recipe = get_string(v, "recipe", where, "mixture");
  if (recipe == "mixture") {
    spec.recipe = Recipe::Mixture;
  } else if (recipe == "shifted_slices") {
    spec.recipe = Recipe::ShiftedSlices;
  } else {
    throw ValidationError("dataset.recipe: unknown recipe '" + recipe +
                          "' (expected mixture or shifted_slices)");
  }
  spec.n = get_count(v, "n", where, spec.n);
  if (spec.n < 2) throw ValidationError("dataset.n: grid needs at least 2 points");
  get_domain(v, where, spec.a, spec.b);
  spec.seed = get_count(v, "seed", where, 0);

  if (spec.recipe == Recipe::Mixture) {
    for (const char* key : {"pairs", "n_slices", "shift_std"}) {
      if (v.contains(key)) throw ValidationError(std::string("dataset.") + key + ": not used by the mixture recipe");
    }
    spec.order = get_count(v, "order", where, spec.order);
    if (spec.order == 0) throw ValidationError("dataset.order: must be positive");
    spec.samples = get_count(v, "samples", where, spec.samples);
    if (spec.samples == 0) throw ValidationError("dataset.samples: must be positive");
    if (v.contains("components")) {
      const auto& comps = v.at("components");
      if (!comps.is_array() || comps.empty()) {
        throw ValidationError("dataset.components: expected a non-empty list");
      }
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string w = "dataset.components[" + std::to_string(i) + "]";
        if (!comps[i].is_array() || comps[i].size() != spec.order) {
          throw ValidationError(w + ": expected one atom per mode (" + std::to_string(spec.order) + ")");
        }
        std::vector<AtomSpec> atoms;
        for (std::size_t k = 0; k < spec.order; ++k) {
          atoms.push_back(parse_atom(comps[i][k], w + "[" + std::to_string(k) + "]", spec.n, spec.a, spec.b));
        }
        spec.components.push_back(std::move(atoms));
      }
    } else {
      spec.components = default_components(spec.n, spec.order, spec.a, spec.b);
    }
    const std::size_t r = spec.components.size();
    spec.weights = get_list<double>(v, "weights", where, to_real,
                                    std::vector<double>(r, 1.0 / static_cast<double>(r)));
    if (spec.weights.size() != r) {
      throw ValidationError("dataset.weights: expected " + std::to_string(r) + " entries");
    }
    double total = 0.0;
    for (double w : spec.weights) {
      if (!(w >= 0.0)) throw ValidationError("dataset.weights: entries must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("dataset.weights: must sum to 1");
  } else {
    for (const char* key : {"order", "components", "weights", "samples"}) {
      if (v.contains(key)) throw ValidationError(std::string("dataset.") + key + ": not used by the shifted_slices recipe");
    }
    spec.n_slices = get_count(v, "n_slices", where, spec.n_slices);
    if (spec.n_slices == 0) throw ValidationError("dataset.n_slices: must be positive");
    spec.shift_std = get_real(v, "shift_std", where, spec.shift_std);
    if (!(spec.shift_std >= 0.0)) throw ValidationError("dataset.shift_std: must be non-negative");
    if (v.contains("pairs")) {
      const auto& pairs = v.at("pairs");
      if (!pairs.is_array() || pairs.empty()) throw ValidationError("dataset.pairs: expected a non-empty list");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string w = "dataset.pairs[" + std::to_string(i) + "]";
        check_keys(pairs[i], w, {"row", "col"});
        if (!pairs[i].contains("row") || !pairs[i].contains("col")) {
          throw ValidationError(w + ": needs 'row' and 'col' atoms");
        }
        spec.pairs.push_back({parse_atom(pairs[i].at("row"), w + ".row", spec.n, spec.a, spec.b),
                              parse_atom(pairs[i].at("col"), w + ".col", spec.n, spec.a, spec.b)});
      }
    } else {
      spec.pairs = default_pairs(spec.n, spec.a, spec.b);
    }
  }
  return spec;
}

LossConfig parse_loss(const json& v) {
  const std::string where = "loss";
  check_keys(v, where, {"type", "slice_axis", "epsilon", "lambda", "cost"});
  LossConfig loss;
  const std::string type = get_string(v, "type", where, "product");
  if (type == "product") {
    loss.mode = LossMode::ProductTensor;
    if (v.contains("slice_axis")) throw ValidationError("loss.slice_axis: only used with type 'slices'");
  } else if (type == "slices") {
    loss.mode = LossMode::SliceSum;
    const std::size_t axis = get_count(v, "slice_axis", where, 1);
    if (axis == 0) throw ValidationError("loss.slice_axis: modes are numbered from 1");
    loss.slice_axis = axis - 1;
  } else {
    throw ValidationError("loss.type: unknown loss type '" + type + "' (expected product or slices)");
  }
  loss.epsilon = get_real(v, "epsilon", where, loss.epsilon);
  if (!(loss.epsilon > 0.0) || !std::isfinite(loss.epsilon)) {
    throw ValidationError("loss.epsilon: must be positive");
  }
  if (v.contains("lambda")) {
    const auto& l = v.at("lambda");
    if (l.is_string()) {
      if (l.get<std::string>() != "balanced") {
        throw ValidationError("loss.lambda: expected a positive number or \"balanced\"");
      }
      loss.lambda = kBalanced;
    } else if (l.is_number()) {
      loss.lambda = l.get<double>();
      if (!(loss.lambda > 0.0) || !std::isfinite(loss.lambda)) {
        throw ValidationError("loss.lambda: must be positive");
      }
    } else {
      throw ValidationError("loss.lambda: expected a positive number or \"balanced\"");
    }
  }
  if (v.contains("cost")) {
    const auto& c = v.at("cost");
    check_keys(c, "loss.cost", {"p", "normalize", "domain"});
    loss.cost.p = get_real(c, "p", "loss.cost", loss.cost.p);
    if (!(loss.cost.p >= 1.0)) throw ValidationError("loss.cost.p: must be >= 1");
    loss.cost.normalize = get_bool(c, "normalize", "loss.cost", loss.cost.normalize);
    get_domain(c, "loss.cost", loss.cost.a, loss.cost.b);
  }
  return loss;
}

ModelSpec parse_model(const json& v) {
  const std::string where = "model";
  check_keys(v, where, {"format", "ranks", "core_constraint", "factor_constraints"});
  ModelSpec spec;
  const std::string format = get_string(v, "format", where, "cp");
  if (format == "cp") {
    spec.format = Format::CP;
  } else if (format == "tucker") {
    spec.format = Format::Tucker;
  } else {
    throw ValidationError("model.format: unknown format '" + format + "' (expected cp or tucker)");
  }
  if (!v.contains("ranks")) throw ValidationError("model.ranks: required");
  spec.ranks = get_list<std::size_t>(v, "ranks", where, to_count, {});
  for (auto r : spec.ranks) {
    if (r == 0) throw ValidationError("model.ranks: ranks must be positive");
  }
  if (v.contains("core_constraint")) {
    if (spec.format == Format::CP) {
      throw ValidationError("model.core_constraint: the CP core is fixed");
    }
    spec.core_constraint = to_constraint(v.at("core_constraint"), "model.core_constraint");
  }
  spec.factor_constraints = get_list<Constraint>(v, "factor_constraints", where, to_constraint,
                                                 {Constraint::ColumnSimplex});
  return spec;
}

void parse_solver(const json& v, SolverConfig& cfg) {
  const std::string where = "solver";
  check_keys(v, where, {"rho", "outer_iters", "outer_tol", "init", "seed", "inner", "monitor"});
  cfg.rho = get_list<double>(v, "rho", where, to_real, cfg.rho);
  for (double r : cfg.rho) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("solver.rho: entries must be positive");
  }
  cfg.outer_iters = get_count(v, "outer_iters", where, cfg.outer_iters);
  cfg.outer_tol = get_real(v, "outer_tol", where, cfg.outer_tol);
  if (!(cfg.outer_tol > 0.0)) throw ValidationError("solver.outer_tol: must be positive");
  const std::string init = get_string(v, "init", where, "nnsvd");
  if (init == "nnsvd") {
    cfg.init = InitMethod::NNSVD;
  } else if (init == "random") {
    cfg.init = InitMethod::Random;
  } else {
    throw ValidationError("solver.init: unknown initialisation '" + init + "' (expected nnsvd or random)");
  }
  cfg.seed = get_count(v, "seed", where, cfg.seed);
  if (v.contains("inner")) {
    const auto& in = v.at("inner");
    const std::string w = "solver.inner";
    check_keys(in, w, {"method", "grad_tol", "max_iters", "memory", "armijo", "initial_step",
                       "max_halvings"});
    const std::string method = get_string(in, "method", w, "lbfgs");
    if (method == "lbfgs") {
      cfg.inner.method = InnerMethod::LBFGS;
    } else if (method == "gd") {
      cfg.inner.method = InnerMethod::GradientDescent;
    } else {
      throw ValidationError("solver.inner.method: unknown method '" + method + "' (expected lbfgs or gd)");
    }
    cfg.inner.grad_tol = get_real(in, "grad_tol", w, cfg.inner.grad_tol);
    if (!(cfg.inner.grad_tol > 0.0)) throw ValidationError("solver.inner.grad_tol: must be positive");
    cfg.inner.max_iters = get_count(in, "max_iters", w, cfg.inner.max_iters);
    cfg.inner.memory = get_count(in, "memory", w, cfg.inner.memory);
    if (cfg.inner.memory == 0) throw ValidationError("solver.inner.memory: must be positive");
    cfg.inner.armijo = get_real(in, "armijo", w, cfg.inner.armijo);
    if (!(cfg.inner.armijo > 0.0 && cfg.inner.armijo < 1.0)) {
      throw ValidationError("solver.inner.armijo: must lie in (0, 1)");
    }
    cfg.inner.initial_step = get_real(in, "initial_step", w, cfg.inner.initial_step);
    if (!(cfg.inner.initial_step > 0.0)) throw ValidationError("solver.inner.initial_step: must be positive");
    cfg.inner.max_halvings = get_count(in, "max_halvings", w, cfg.inner.max_halvings);
  }
  if (v.contains("monitor")) {
    const auto& m = v.at("monitor");
    const std::string w = "solver.monitor";
    check_keys(m, w, {"tol", "max_iter", "per_block"});
    cfg.monitor.sinkhorn.tol = get_real(m, "tol", w, cfg.monitor.sinkhorn.tol);
    if (!(cfg.monitor.sinkhorn.tol > 0.0)) throw ValidationError("solver.monitor.tol: must be positive");
    cfg.monitor.sinkhorn.max_iter = get_count(m, "max_iter", w, cfg.monitor.sinkhorn.max_iter);
    cfg.monitor.per_block = get_bool(m, "per_block", w, cfg.monitor.per_block);
  }
}

}  // namespace

std::string format_tensor(const DenseTensor& t) {
  std::string out(kMagic);
  out += '\n';
  for (std::size_t k = 0; k < t.order(); ++k) {
    if (k) out += ' ';
    out += std::to_string(t.dim(k));
  }
  out += '\n';
  // One line per last-mode fiber keeps files readable.
  const std::size_t row = t.order() ? t.shape().back() : 1;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += format_real(t[i]);
    out += (i + 1) % row == 0 ? '\n' : ' ';
  }
  return out;
}

DenseTensor parse_tensor(std::string_view text) {
  std::istringstream in{std::string(text)};
  const std::string magic = getline_or_throw(in, "magic");
  if (magic != kMagic) {
    throw FormatError("WTF1: bad magic line '" + magic.substr(0, 40) + "' (expected '" +
                      std::string(kMagic) + "')");
  }
  const std::string shape_line = getline_or_throw(in, "shape");
  Shape shape;
  {
    std::istringstream ss(shape_line);
    std::string token;
    while (ss >> token) {
      char* end = nullptr;
      const unsigned long long n = std::strtoull(token.c_str(), &end, 10);
      if (token.empty() || *end != '\0' || token[0] == '-' || n == 0) {
        throw FormatError("WTF1: invalid shape entry '" + token + "'");
      }
      shape.push_back(static_cast<std::size_t>(n));
    }
  }
  if (shape.empty()) throw FormatError("WTF1: empty shape line");
  const std::size_t expected = shape_volume(shape);
  std::vector<double> values;
  values.reserve(expected);
  std::string token;
  std::size_t found = 0;
  while (in >> token) {
    double v = 0.0;
    if (!parse_real(token, v)) {
      throw FormatError("WTF1: non-numeric value '" + token.substr(0, 40) + "' at position " +
                        std::to_string(found));
    }
    ++found;
    if (values.size() < expected) values.push_back(v);
  }
  if (found != expected) {
    throw FormatError("WTF1: data length mismatch: expected " + std::to_string(expected) +
                      " values, found " + std::to_string(found));
  }
  return DenseTensor(std::move(shape), std::move(values));
}

void write_tensor(const DenseTensor& t, const fs::path& path) { write_file(path, format_tensor(t)); }

DenseTensor read_tensor(const fs::path& path) {
  try {
    return parse_tensor(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(const Matrix& m, const fs::path& path) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_real(m(i, j));
    }
    out += '\n';
  }
  write_file(path, out);
}

Matrix read_matrix_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      if (!parse_real(trim(cell), v)) {
        throw FormatError(path.string() + ": non-numeric cell '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty matrix file");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void export_model(const TuckerModel& model, const fs::path& dir) {
  model.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  json meta;
  meta["format"] = model.core_fixed ? "cp" : "tucker";
  meta["core_fixed"] = model.core_fixed;
  meta["core_constraint"] = std::string(to_string(model.core_constraint));
  meta["shape"] = model.data_shape();
  meta["ranks"] = model.ranks();
  json constraints = json::array();
  for (std::size_t k = 0; k < model.order(); ++k) {
    constraints.push_back(std::string(to_string(model.factor_constraints[k])));
    write_matrix_csv(model.factors[k], dir / ("factor_" + std::to_string(k + 1) + ".csv"));
  }
  meta["factor_constraints"] = constraints;
  write_tensor(model.core, dir / "core.wtf");
  write_file(dir / "model.json", meta.dump(2) + "\n");
}

TuckerModel import_model(const fs::path& dir) {
  json meta;
  try {
    meta = json::parse(read_file(dir / "model.json"));
  } catch (const json::exception& e) {
    throw FormatError((dir / "model.json").string() + ": " + e.what());
  }
  TuckerModel model;
  try {
    model.core_fixed = meta.at("core_fixed").get<bool>();
    model.core_constraint = parse_constraint(meta.at("core_constraint").get<std::string>());
    for (const auto& c : meta.at("factor_constraints")) {
      model.factor_constraints.push_back(parse_constraint(c.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw FormatError((dir / "model.json").string() + ": " + e.what());
  }
  for (std::size_t k = 0; k < model.factor_constraints.size(); ++k) {
    model.factors.push_back(read_matrix_csv(dir / ("factor_" + std::to_string(k + 1) + ".csv")));
  }
  model.core = read_tensor(dir / "core.wtf");
  model.validate();
  return model;
}

void export_trace(const SolveTrace& trace, const fs::path& path) {
  std::string out = "sweep,block,dual_value,grad_norm,primal_objective,seconds\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.sweep) + ',' + block_label(r.block) + ',' + format_real(r.dual_value) +
           ',' + format_real(r.grad_norm) + ',' +
           (std::isnan(r.primal_objective) ? std::string() : format_real(r.primal_objective)) +
           ',' + format_real(r.seconds) + '\n';
  }
  write_file(path, out);
}

std::vector<std::vector<AtomSpec>> default_components(std::size_t n, std::size_t order, double a,
                                                      double b) {
  const auto atoms = default_atoms(n, a, b);
  std::vector<std::vector<AtomSpec>> out(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t k = 0; k < order; ++k) out[i].push_back(atoms[(i + k) % atoms.size()]);
  }
  return out;
}

std::vector<AtomPair> default_pairs(std::size_t n, double a, double b) {
  const auto atoms = default_atoms(n, a, b);
  return {{atoms[0], atoms[2]}, {atoms[2], atoms[0]}};
}

Dataset generate_dataset(const DatasetSpec& given) {
  // Empty atom lists mean the defaults, as in a config without them.
  DatasetSpec spec = given;
  if (spec.recipe == Recipe::Mixture && spec.components.empty()) {
    spec.components = default_components(spec.n, spec.order, spec.a, spec.b);
  }
  if (spec.recipe == Recipe::Mixture && spec.weights.empty()) {
    const auto r = static_cast<double>(spec.components.size());
    spec.weights.assign(spec.components.size(), 1.0 / r);
  }
  if (spec.recipe == Recipe::ShiftedSlices && spec.pairs.empty()) {
    spec.pairs = default_pairs(spec.n, spec.a, spec.b);
  }
  Dataset out;
  if (spec.recipe == Recipe::Mixture) {
    std::vector<std::vector<Vector>> atoms;
    for (const auto& comp : spec.components) {
      std::vector<Vector> modes;
      for (const auto& a : comp) modes.push_back(gaussian_atom(a));
      atoms.push_back(std::move(modes));
    }
    DenseTensor x_true = separable_mixture(atoms, spec.weights);
    x_true.vec() /= x_true.sum();
    out.tensor = empirical_sample(x_true, spec.samples, spec.seed);
    const std::size_t d = atoms.front().size();
    out.truth.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      out.truth[k].resize(atoms.front()[k].size(), static_cast<Eigen::Index>(atoms.size()));
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        out.truth[k].col(static_cast<Eigen::Index>(i)) = atoms[i][k];
      }
    }
  } else {
    out.tensor = shifted_slice_dataset(spec.pairs, spec.n_slices, spec.shift_std, spec.seed);
    out.truth.resize(3);
    const auto r = static_cast<Eigen::Index>(spec.pairs.size());
    out.truth[1].resize(static_cast<Eigen::Index>(spec.n), r);
    out.truth[2].resize(static_cast<Eigen::Index>(spec.n), r);
    for (Eigen::Index i = 0; i < r; ++i) {
      out.truth[1].col(i) = gaussian_atom(spec.pairs[static_cast<std::size_t>(i)].row);
      out.truth[2].col(i) = gaussian_atom(spec.pairs[static_cast<std::size_t>(i)].col);
    }
  }
  return out;
}

RunConfig parse_run_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config", {"dataset", "loss", "model", "solver"});
  RunConfig cfg;
  if (root.contains("dataset")) cfg.dataset = parse_dataset(root.at("dataset"));
  if (root.contains("loss")) cfg.loss = parse_loss(root.at("loss"));
  if (root.contains("model")) {
    cfg.solver.model = parse_model(root.at("model"));
  } else {
    cfg.solver.model.ranks = {1};
    cfg.solver.model.factor_constraints = {Constraint::ColumnSimplex};
  }
  if (root.contains("solver")) parse_solver(root.at("solver"), cfg.solver);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const FormatError& e) {
    throw ValidationError(e.what());
  }
  return parse_run_config(text);
}

LossSpec build_loss(const LossConfig& loss, const Shape& data_shape) {
  LossSpec spec;
  spec.mode = loss.mode;
  spec.slice_axis = loss.slice_axis;
  spec.lambda = loss.lambda;
  if (loss.mode == LossMode::SliceSum && loss.slice_axis >= data_shape.size()) {
    throw ValidationError("loss.slice_axis: mode " + std::to_string(loss.slice_axis + 1) +
                          " does not exist in data of order " + std::to_string(data_shape.size()));
  }
  std::vector<Matrix> costs;
  for (std::size_t k = 0; k < data_shape.size(); ++k) {
    if (loss.mode == LossMode::SliceSum && k == loss.slice_axis) continue;
    costs.push_back(build_grid_cost(data_shape[k], loss.cost.a, loss.cost.b, loss.cost.p,
                                    loss.cost.normalize));
  }
  spec.kernel = gibbs_kernel(std::move(costs), loss.epsilon);
  return spec;
}

SolverConfig solver_config(const RunConfig& cfg, const Shape& data_shape) {
  SolverConfig out = cfg.solver;
  out.loss = build_loss(cfg.loss, data_shape);
  validate_config(out, data_shape);
  return out;
}

}  // namespace wtf
