#pragma once

#include <memory>
#include <vector>

#include "isoshell/solver.hpp"

namespace isoshell {

enum class LoadVariant { f1, f2 };

/// One of the five benchmark configurations.
struct ExampleSpec {
  int id = 0;
  Domain domain = Domain::unit_square;
  std::function<Vec3(const Vec2&)> chart;
  std::function<Mat32(const Vec2&)> chart_grad;
  std::vector<Segment> dirichlet;
  std::function<Vec3(const Vec2&)> load_f1;
  std::function<Vec3(const Vec2&)> load_f2;  // null if the example has one load
  std::function<Vec3(const Vec2&)> bc_value;  // null -> clamped to the chart
  double alpha = 1.0 / 12.0;
  bool curvature_vs_finest = false;  // report |K_h - K_h*| instead of |K_h|
  // True when the chart has unit first fundamental form (plate, cylinder), in
  // which case tabulated energies are measured relative to the undeformed
  // interpolant; otherwise the absolute discrete energy is reported.
  bool isometric_chart = false;
};

ExampleSpec example_spec(int id);

/// Everything tied to one refinement level.
struct LevelData {
  Mesh mesh;
  ProlongationMap from_coarse;  // empty at level 0
  std::unique_ptr<BasisCache> basis;
  DktField psiA_h;
  SurfaceCache surface;
  DofMap dofs;
};

struct ContinuationResult {
  std::vector<std::unique_ptr<LevelData>> levels;
  std::vector<SolveResult> solves;
  BoundaryData bc;
  Load load;
};

/// Solves the example on levels 0..levels-1, each level initialized by
/// prolongation of the previous solution.
ContinuationResult continuation_solve(const ExampleSpec& spec, LoadVariant variant, int levels,
                                      double tol = 1e-12, int max_iter = 100,
                                      bool lumped_constraint_scaling = false);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double energy = 0.0;
  double iso_err = 0.0;   // |g[psi] - g_A|_F in L1, analytic g_A
  double curv = 0.0;      // |K_h| or |K_h - K_h*| in L1
  double hess_err = 0.0;  // |grad theta - grad theta (finest)| in L2; NaN on the finest row
};

double isometry_error(const DktField& psi, const BasisCache& bc,
                      const std::function<Mat32(const Vec2&)>& chart_grad);
double curvature_norm(const DktField& psi, const BasisCache& bc);
double curvature_diff(const DktField& a, const DktField& b, const BasisCache& bc);
double hessian_error(const DktField& a, const DktField& b, const BasisCache& bc);

/// Differences between solutions on two nested refinement levels, integrated
/// over the quadrature points of the fine mesh with the coarse field
/// evaluated exactly on its own elements (red refinement stores the four
/// children of triangle t contiguously, so ancestors are index shifts).
/// Interpolating the coarse solution into the fine space instead would
/// perturb second derivatives at the same order as the measured error.
double curvature_diff_nested(const DktField& coarse, const BasisCache& coarse_bc,
                             const DktField& fine, const BasisCache& fine_bc);
double hessian_error_nested(const DktField& coarse, const BasisCache& coarse_bc,
                            const DktField& fine, const BasisCache& fine_bc);

/// Repeated DKT prolongation from chain level `from` to the finest level.
DktField prolongate_to_finest(const ContinuationResult& run, int from);

std::vector<ConvergenceRow> convergence_table(const ExampleSpec& spec,
                                              const ContinuationResult& run);

struct ExperimentRun {
  ContinuationResult chain;
  std::vector<ConvergenceRow> rows;
};

ExperimentRun run_example(const ExampleSpec& spec, LoadVariant variant, int levels,
                          double tol = 1e-12, int max_iter = 100,
                          bool lumped_constraint_scaling = false);

}  // namespace isoshell
