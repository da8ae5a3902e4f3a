#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "isoshell/checks.hpp"
#include "isoshell/io.hpp"

namespace {

// process exit codes by failure category
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // verify failures and unexpected errors
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

std::string load_name(isoshell::LoadVariant v) {
  return v == isoshell::LoadVariant::f1 ? "f1" : "f2";
}

int run_command(const isoshell::RunConfig& cfg) {
  using namespace isoshell;
  validate(cfg);

  const ExampleSpec spec = example_spec(cfg.example);
  ExperimentRun run;
  try {
    run = run_example(spec, cfg.load, cfg.levels, cfg.tol, cfg.max_iter,
                      cfg.lumped_constraint_scaling);
  } catch (const std::runtime_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }

  std::printf("%5s %12s %14s %14s %14s %14s %6s\n", "level", "h", "energy", "iso_err",
              "curvature", "hess_err", "iters");
  for (size_t i = 0; i < run.rows.size(); ++i) {
    const ConvergenceRow& r = run.rows[i];
    std::printf("%5d %12.6g %14.8g %14.6g %14.6g %14.6g %6d\n", r.level, r.h, r.energy,
                r.iso_err, r.curv, r.hess_err, run.chain.solves[i].iterations);
  }

  bool all_converged = true;
  for (const SolveResult& s : run.chain.solves) all_converged = all_converged && s.converged;
  if (!all_converged) std::cerr << "solver failure: Newton did not reach the tolerance\n";

  try {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem = cfg.out_dir + "/example" + std::to_string(cfg.example) + "_" +
                             load_name(cfg.load);
    if (cfg.export_csv) write_csv(run.rows, stem + ".csv");
    const LevelData& finest = *run.chain.levels.back();
    const DktField& psi = run.chain.solves.back().psi;
    if (cfg.export_vtk) export_surface(psi, finest.mesh, std::nullopt, stem + ".vtk",
                                       ExportFormat::vtk_ascii);
    if (cfg.export_obj) export_surface(psi, finest.mesh, std::nullopt, stem + ".obj",
                                       ExportFormat::obj);
  } catch (const isoshell::IoError& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return kExitIo;
  }
  return all_converged ? kExitOk : kExitSolver;
}

int verify_command() {
  const auto results = isoshell::run_property_suite();
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %s (%s)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.pass;
  }
  return all ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isometric bending of parametrized thin shells: convergence driver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Solve one example over a refinement hierarchy");
  std::string config_file;
  int example = 0;
  std::string load;
  int levels = 0;
  double tol = 0.0;
  int max_iter = 0;
  std::string out_dir;
  std::vector<std::string> exports;
  bool lumped = false;
  bool no_csv = false;
  run->add_option("--config", config_file, "Key-value config file; flags override it");
  run->add_option("--example", example, "Example id (1..5)");
  run->add_option("--load", load, "Load variant: f1 or f2");
  run->add_option("--levels", levels, "Number of refinement levels (>= 1)");
  run->add_option("--tol", tol, "Newton tolerance on the KKT residual");
  run->add_option("--max-iter", max_iter, "Newton iteration cap");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--export", exports, "Comma-separated formats: vtk,obj,csv")
      ->delimiter(',');
  run->add_flag("--lumped-constraint-scaling", lumped,
                "Weight nodal constraints by lumped vertex areas");
  run->add_flag("--no-csv", no_csv, "Skip the default CSV table output");

  auto* verify = app.add_subcommand("verify", "Run the fast property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return verify_command();

    isoshell::RunConfig cfg;
    if (!config_file.empty()) cfg = isoshell::parse_config_file(config_file);
    if (run->count("--example")) cfg.example = example;
    if (run->count("--load")) isoshell::apply_config_entry(cfg, "load", load);
    if (run->count("--levels")) cfg.levels = levels;
    if (run->count("--tol")) cfg.tol = tol;
    if (run->count("--max-iter")) cfg.max_iter = max_iter;
    if (run->count("--out")) cfg.out_dir = out_dir;
    if (run->count("--lumped-constraint-scaling")) cfg.lumped_constraint_scaling = true;
    if (run->count("--export")) {
      cfg.export_vtk = cfg.export_obj = false;
      for (const std::string& e : exports) {
        if (e == "vtk") {
          cfg.export_vtk = true;
        } else if (e == "obj") {
          cfg.export_obj = true;
        } else if (e == "csv") {
          cfg.export_csv = true;
        } else {
          throw isoshell::ConfigError("unknown export format '" + e + "'");
        }
      }
    }
    if (no_csv) cfg.export_csv = false;
    return run_command(cfg);
  } catch (const isoshell::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const isoshell::IoError& e) {
    std::cerr << "i/o failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
