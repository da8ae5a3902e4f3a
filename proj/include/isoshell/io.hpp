#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isoshell/experiments.hpp"

namespace isoshell {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int example = 1;
  LoadVariant load = LoadVariant::f1;
  int levels = 6;
  double tol = 1e-12;
  int max_iter = 100;
  std::string out_dir = ".";
  bool export_vtk = false;
  bool export_obj = false;
  bool export_csv = true;
  bool lumped_constraint_scaling = false;
  bool deterministic_reduction = true;
};

/// Applies one flat "key value" assignment; throws ConfigError naming the key.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key-value file ("key = value" or "key value" per line, '#'
/// comments). Later command-line flags are meant to override these entries.
RunConfig parse_config_file(const std::string& path, RunConfig base = RunConfig{});

void validate(const RunConfig& cfg);

void write_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);
std::vector<ConvergenceRow> read_csv(const std::string& path);

enum class ExportFormat { vtk_ascii, obj };

/// Writes the deformed surface (points psi(z), triangles as cells) with an
/// optional per-triangle scalar as VTK CELL_DATA.
void export_surface(const DktField& psi, const Mesh& m,
                    const std::optional<std::vector<double>>& cell_field, const std::string& path,
                    ExportFormat format);

}  // namespace isoshell
