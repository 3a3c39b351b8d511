#include "wtf/datagen.hpp"
#include "wtf/error.hpp"
#include "wtf/io.hpp"
#include "wtf/solver.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

// Ground-truth atoms written next to a simulated dataset.
fs::path atoms_path(const fs::path& data, std::size_t mode) {
  return fs::path(data.string() + ".atoms_" + std::to_string(mode + 1) + ".csv");
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int simulate(const fs::path& config_path, const fs::path& out) {
  const auto cfg = wtf::load_run_config(config_path);
  if (!cfg.dataset) throw wtf::ValidationError("config: simulate needs a 'dataset' section");
  const auto data = wtf::generate_dataset(*cfg.dataset);
  wtf::write_tensor(data.tensor, out);
  for (std::size_t k = 0; k < data.truth.size(); ++k) {
    if (data.truth[k].size() > 0) wtf::write_matrix_csv(data.truth[k], atoms_path(out, k));
  }
  std::cout << "wrote " << out.string() << '\n';
  return kExitOk;
}

int decompose(const fs::path& config_path, const fs::path& data_path, const fs::path& out) {
  const auto run = wtf::load_run_config(config_path);
  const auto x = wtf::read_tensor(data_path);
  const auto cfg = wtf::solver_config(run, x.shape());
  const auto result = wtf::block_coordinate_descent(x, cfg);

  wtf::export_model(result.model, out);
  wtf::export_trace(result.trace, out / "trace.csv");
  fs::copy_file(config_path, out / "config.json", fs::copy_options::overwrite_existing);

  const auto parts = wtf::smoothed_objective(x, result.model, cfg);
  const auto metrics = wtf::reconstruction_metrics(x, result.model, cfg.loss, cfg.monitor.sinkhorn);
  std::ostringstream m;
  m << "sweeps: " << result.sweeps << '\n'
    << "converged: " << (result.converged ? "true" : "false") << '\n'
    << "inner_flagged: " << (result.inner_flagged ? "true" : "false") << '\n'
    << "initial_objective: " << real(result.trace.initial_objective) << '\n'
    << "objective: " << real(parts.total()) << '\n'
    << "loss: " << real(parts.loss) << '\n'
    << "barrier: " << real(parts.barrier) << '\n'
    << "frobenius_rel_error: " << real(metrics.frobenius_rel_error) << '\n'
    << "sinkhorn_residual: " << real(metrics.monitored_loss.residual) << '\n';
  for (std::size_t k = 0; k < x.order(); ++k) {
    const auto path = atoms_path(data_path, k);
    if (!fs::exists(path)) continue;
    const wtf::Matrix truth = wtf::read_matrix_csv(path);
    const wtf::Matrix& learned = result.model.factors[k];
    if (truth.rows() != learned.rows() || truth.cols() != learned.cols()) continue;
    const auto match = wtf::atom_match_score(wtf::normalize_columns(learned), truth);
    m << "atom_tv_mode_" << k + 1 << ":";
    for (double d : match.distances) m << ' ' << real(d);
    m << '\n' << "atom_tv_mode_" << k + 1 << "_max: " << real(match.worst()) << '\n';
    if (match.greedy) m << "atom_match_mode_" << k + 1 << ": greedy\n";
  }
  std::ofstream(out / "metrics.txt") << m.str();
  std::cout << m.str();

  if (!result.converged || result.inner_flagged) {
    std::cerr << "wtf: did not converge (" << result.sweeps << " sweeps"
              << (result.inner_flagged ? ", inner solver flagged" : "") << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int project(const fs::path& model_dir, const fs::path& data_path, std::size_t block,
            const fs::path& out) {
  const auto basis = wtf::import_model(model_dir);
  const auto run = wtf::load_run_config(model_dir / "config.json");
  const auto x = wtf::read_tensor(data_path);
  if (block == 0 || block > basis.order()) {
    throw wtf::ValidationError("--block must lie in 1.." + std::to_string(basis.order()));
  }
  wtf::SolverConfig cfg = run.solver;
  cfg.loss = wtf::build_loss(run.loss, x.shape());
  wtf::validate_loss(cfg.loss, x.shape());
  const auto result = wtf::project_onto_basis(x, basis, block - 1, cfg);
  wtf::write_matrix_csv(result.block, out);
  if (!result.inner.converged()) {
    std::cerr << "wtf: projection solve did not converge (grad norm " << real(result.inner.grad_norm)
              << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int evaluate(const fs::path& a_path, const fs::path& b_path, const fs::path& config_path) {
  const auto run = wtf::load_run_config(config_path);
  const auto a = wtf::read_tensor(a_path);
  const auto b = wtf::read_tensor(b_path);
  if (a.shape() != b.shape()) throw wtf::ValidationError("--data and --data2 differ in shape");
  const auto loss = wtf::build_loss(run.loss, a.shape());
  wtf::validate_loss(loss, a.shape());
  const auto ot = wtf::monitored_loss(a, b, loss, run.solver.monitor.sinkhorn);
  wtf::DenseTensor diff = a;
  diff.vec() -= b.vec();
  std::cout << "ot_value: " << real(ot.value) << '\n'
            << "frobenius: " << real(wtf::frobenius_norm(diff)) << '\n';
  if (!ot.converged) {
    std::cerr << "wtf: Sinkhorn did not converge (residual " << real(ot.residual) << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein tensor factorisation"};
  app.require_subcommand(1);

  std::string config, data, data2, out, model;
  std::size_t block = 0;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--config", config, "Run configuration (JSON)")->required();
  sim->add_option("--out", out, "Output tensor file")->required();

  auto* dec = app.add_subcommand("decompose", "Run block coordinate descent");
  dec->add_option("--config", config, "Run configuration (JSON)")->required();
  dec->add_option("--data", data, "Input tensor file")->required();
  dec->add_option("--out", out, "Output directory")->required();

  auto* proj = app.add_subcommand("project", "Solve for one factor against a fixed model");
  proj->add_option("--model", model, "Model directory written by decompose")->required();
  proj->add_option("--data", data, "New data tensor")->required();
  proj->add_option("--block", block, "Factor to solve for (1-based mode)")->required();
  proj->add_option("--out", out, "Output CSV")->required();

  auto* ev = app.add_subcommand("evaluate", "OT and Frobenius distance between two tensors");
  ev->add_option("--data", data, "First tensor")->required();
  ev->add_option("--data2", data2, "Second tensor")->required();
  ev->add_option("--config", config, "Run configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*sim) return simulate(config, out);
    if (*dec) return decompose(config, data, out);
    if (*proj) return project(model, data, block, out);
    if (*ev) return evaluate(data, data2, config);
  } catch (const wtf::ValidationError& e) {
    std::cerr << "wtf: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const wtf::FormatError& e) {
    std::cerr << "wtf: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const wtf::ShapeError& e) {
    std::cerr << "wtf: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "wtf: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
