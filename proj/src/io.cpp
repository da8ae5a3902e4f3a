#include "isoshell/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace isoshell {

namespace {

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "example") {
      cfg.example = std::stoi(value);
    } else if (key == "load") {
      if (value == "f1") {
        cfg.load = LoadVariant::f1;
      } else if (value == "f2") {
        cfg.load = LoadVariant::f2;
      } else {
        throw ConfigError("load: must be f1 or f2, got '" + value + "'");
      }
    } else if (key == "levels") {
      cfg.levels = std::stoi(value);
    } else if (key == "tol") {
      cfg.tol = std::stod(value);
    } else if (key == "max_iter") {
      cfg.max_iter = std::stoi(value);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "export_vtk") {
      cfg.export_vtk = parse_bool(key, value);
    } else if (key == "export_obj") {
      cfg.export_obj = parse_bool(key, value);
    } else if (key == "export_csv") {
      cfg.export_csv = parse_bool(key, value);
    } else if (key == "lumped_constraint_scaling") {
      cfg.lumped_constraint_scaling = parse_bool(key, value);
    } else if (key == "deterministic_reduction") {
      cfg.deterministic_reduction = parse_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": could not parse value '" + value + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError(key + ": value out of range '" + value + "'");
  }
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) throw ConfigError(path + ":" + std::to_string(lineno) + ": missing value");
    if (value == "=" && !(ls >> value)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": missing value");
    }
    apply_config_entry(base, key, value);
  }
  return base;
}

void validate(const RunConfig& cfg) {
  if (cfg.example < 1 || cfg.example > 5) throw ConfigError("example id out of range (1..5)");
  if (cfg.levels < 1) throw ConfigError("levels must be >= 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (cfg.load == LoadVariant::f2 && (cfg.example == 1 || cfg.example == 5)) {
    throw ConfigError("example " + std::to_string(cfg.example) + " has no load variant f2");
  }
}

void write_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("write_csv: no rows");
  std::ofstream out(path, std::ios::binary);  // binary keeps UNIX newlines everywhere
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "level,h,energy,iso_err_L1,curvature_L1,hessian_err_L2\n";
  for (const ConvergenceRow& r : rows) {
    out << r.level << ',' << format17(r.h) << ',' << format17(r.energy) << ','
        << format17(r.iso_err) << ',' << format17(r.curv) << ',' << format17(r.hess_err) << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<ConvergenceRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv file '" + path + "'");
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw IoError("malformed csv row in '" + path + "'");
    ConvergenceRow r;
    r.level = std::stoi(fields[0]);
    r.h = std::stod(fields[1]);
    r.energy = std::stod(fields[2]);
    r.iso_err = std::stod(fields[3]);
    r.curv = std::stod(fields[4]);
    r.hess_err = std::stod(fields[5]);
    rows.push_back(r);
  }
  return rows;
}

void export_surface(const DktField& psi, const Mesh& m,
                    const std::optional<std::vector<double>>& cell_field, const std::string& path,
                    ExportFormat format) {
  if (psi.mesh() != &m) throw std::invalid_argument("export_surface mesh mismatch");
  if (cell_field && static_cast<int>(cell_field->size()) != m.num_triangles()) {
    throw std::invalid_argument("cell field size must match the triangle count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  if (format == ExportFormat::obj) {
    for (int v = 0; v < m.num_vertices(); ++v) {
      const Vec3 p = psi.value_at(v);
      out << "v " << format17(p[0]) << ' ' << format17(p[1]) << ' ' << format17(p[2]) << '\n';
    }
    for (const auto& t : m.triangles) {
      out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
  } else if (format == ExportFormat::vtk_ascii) {
    out << "# vtk DataFile Version 3.0\n";
    out << "deformed shell surface\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << m.num_vertices() << " double\n";
    for (int v = 0; v < m.num_vertices(); ++v) {
      const Vec3 p = psi.value_at(v);
      out << format17(p[0]) << ' ' << format17(p[1]) << ' ' << format17(p[2]) << '\n';
    }
    out << "CELLS " << m.num_triangles() << ' ' << 4 * m.num_triangles() << '\n';
    for (const auto& t : m.triangles) {
      out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    out << "CELL_TYPES " << m.num_triangles() << '\n';
    for (int t = 0; t < m.num_triangles(); ++t) out << "5\n";
    if (cell_field) {
      out << "CELL_DATA " << m.num_triangles() << '\n';
      out << "SCALARS cell_error double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double x : *cell_field) out << format17(x) << '\n';
    }
  } else {
    throw std::invalid_argument("unknown export format");
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace isoshell
