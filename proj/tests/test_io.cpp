#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "isoshell/io.hpp"

using namespace isoshell;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/isoshell_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv round trip is exact at 17 digits") {
  std::vector<ConvergenceRow> rows(3);
  rows[0] = {0, std::sqrt(2.0) / 2, -0.123456789012345678, 1e-300, 3.0, 0.25};
  rows[1] = {1, std::sqrt(2.0) / 4, 1.0 / 3.0, 5.332e-05, 0.0009403, 0.00899};
  rows[2] = {2, std::sqrt(2.0) / 8, 0.0, 0.0, 0.0, std::nan("")};

  TempFile f("round_trip.csv");
  write_csv(rows, f.path);
  const std::vector<ConvergenceRow> back = read_csv(f.path);
  REQUIRE(back.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].level == rows[i].level);
    CHECK(back[i].h == rows[i].h);
    CHECK(back[i].energy == rows[i].energy);
    CHECK(back[i].iso_err == rows[i].iso_err);
    CHECK(back[i].curv == rows[i].curv);
  }
  CHECK(back[0].hess_err == rows[0].hess_err);
  CHECK(std::isnan(back[2].hess_err));

  // header and UNIX newlines
  const std::string text = slurp(f.path);
  CHECK(text.rfind("level,h,energy,iso_err_L1,curvature_L1,hessian_err_L2\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("csv writer rejects empty input") {
  TempFile f("empty.csv");
  CHECK_THROWS(write_csv({}, f.path));
}

TEST_CASE("config entries parse, validate, and reject unknown keys") {
  RunConfig cfg;
  apply_config_entry(cfg, "example", "2");
  apply_config_entry(cfg, "load", "f2");
  apply_config_entry(cfg, "levels", "5");
  apply_config_entry(cfg, "tol", "1e-10");
  apply_config_entry(cfg, "export_vtk", "true");
  CHECK(cfg.example == 2);
  CHECK(cfg.load == LoadVariant::f2);
  CHECK(cfg.levels == 5);
  CHECK(cfg.tol == 1e-10);
  CHECK(cfg.export_vtk);
  validate(cfg);

  CHECK_THROWS_AS(apply_config_entry(cfg, "banana", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(cfg, "levels", "three"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(cfg, "load", "f3"), ConfigError);

  RunConfig bad;
  bad.example = 9;
  CHECK_THROWS_WITH_AS(validate(bad), "example id out of range (1..5)", ConfigError);
  bad.example = 1;
  bad.levels = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad.levels = 3;
  bad.load = LoadVariant::f2;  // example 1 has a single load
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("config file parsing with comments and flag-style overrides") {
  TempFile f("config.cfg");
  {
    std::ofstream out(f.path);
    out << "# convergence study setup\n";
    out << "example = 3\n";
    out << "levels 4\n";
    out << "tol = 1e-9   # loose\n";
    out << "\n";
  }
  const RunConfig cfg = parse_config_file(f.path);
  CHECK(cfg.example == 3);
  CHECK(cfg.levels == 4);
  CHECK(cfg.tol == 1e-9);
  CHECK(cfg.load == LoadVariant::f1);  // untouched default

  CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("obj export lists deformed vertices and 1-based faces") {
  Mesh m = build_initial_mesh(Domain::unit_square, {});
  m = red_refine(m).first;
  constexpr double kPi = 3.14159265358979323846;
  auto chart = [&](const Vec2& x) {
    return Vec3(std::sin(kPi * x[0]) / kPi, x[1], std::cos(kPi * x[0]) / kPi);
  };
  auto grad = [&](const Vec2& x) {
    Mat32 g;
    g << std::cos(kPi * x[0]), 0, 0, 1, -std::sin(kPi * x[0]), 0;
    return g;
  };
  const DktField psi = dkt_interpolate(chart, grad, m);

  TempFile f("surface.obj");
  export_surface(psi, m, std::nullopt, f.path, ExportFormat::obj);

  std::ifstream in(f.path);
  std::string tag;
  int n_v = 0, n_f = 0;
  double x, y, z;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      ls >> x >> y >> z;
      // every vertex lies on the cylinder of radius 1/pi
      CHECK(std::hypot(x, z) == doctest::Approx(1.0 / kPi).epsilon(1e-12));
      ++n_v;
    } else if (tag == "f") {
      int a, b, c;
      ls >> a >> b >> c;
      CHECK(a >= 1);
      CHECK(b <= m.num_vertices());
      CHECK(c <= m.num_vertices());
      ++n_f;
    }
  }
  CHECK(n_v == m.num_vertices());
  CHECK(n_f == m.num_triangles());
}

TEST_CASE("vtk export carries cells and optional cell data deterministically") {
  Mesh m = build_initial_mesh(Domain::unit_square, {});
  const DktField psi = dkt_interpolate([](const Vec2& x) { return Vec3(x[0], x[1], 0.0); },
                                       [](const Vec2&) {
                                         Mat32 g;
                                         g << 1, 0, 0, 1, 0, 0;
                                         return g;
                                       },
                                       m);
  std::vector<double> field(m.num_triangles());
  for (size_t i = 0; i < field.size(); ++i) field[i] = 0.5 * static_cast<double>(i);

  TempFile a("surface_a.vtk"), b("surface_b.vtk");
  export_surface(psi, m, field, a.path, ExportFormat::vtk_ascii);
  export_surface(psi, m, field, b.path, ExportFormat::vtk_ascii);
  const std::string text = slurp(a.path);
  CHECK(text == slurp(b.path));  // deterministic bytes

  CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(text.find("POINTS " + std::to_string(m.num_vertices()) + " double") != std::string::npos);
  CHECK(text.find("CELL_DATA " + std::to_string(m.num_triangles())) != std::string::npos);
  CHECK(text.find("SCALARS cell_error double 1") != std::string::npos);

  // flat plate: every point line ends with z = 0
  CHECK(text.find("\n0 0 0\n") != std::string::npos);

  std::vector<double> short_field(1);
  TempFile c("surface_c.vtk");
  CHECK_THROWS(export_surface(psi, m, short_field, c.path, ExportFormat::vtk_ascii));
}
