#pragma once

#include <vector>

#include "isoshell/energy.hpp"

namespace isoshell {

/// Dirichlet data: value and full Jacobian prescribed per boundary node.
struct BoundaryData {
  std::function<Vec3(const Vec2&)> value;
  std::function<Mat32(const Vec2&)> grad;
};

/// One fixed discretized problem instance on one mesh level.
struct Problem {
  const Mesh* mesh = nullptr;
  const BasisCache* basis = nullptr;
  const SurfaceCache* surface = nullptr;
  const DofMap* dofs = nullptr;
  const DktField* psiA_h = nullptr;
  Load load;
  BoundaryData bc;
};

/// Overwrites the Dirichlet dofs of psi with the boundary data.
DktField apply_dirichlet(DktField psi, const Mesh& m, const BoundaryData& bc);

/// Saddle-point matrix [[H_L, -J^T], [-J, 0]] and Newton right-hand side.
struct KktSystem {
  SparseMat mat;
  Eigen::VectorXd rhs;
};

KktSystem assemble_kkt(const DktField& psi, const Eigen::VectorXd& p, const Problem& pr);

/// Full KKT residual (grad_psi L, -c).
Eigen::VectorXd kkt_residual(const DktField& psi, const Eigen::VectorXd& p, const Problem& pr);

struct SolveResult {
  DktField psi;
  Eigen::VectorXd multipliers;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> step_sizes;
};

SolveResult newton_solve(const Problem& pr, const DktField& init, const Eigen::VectorXd& p_init,
                         double tol = 1e-12, int max_iter = 100);

SolveResult newton_solve(const Problem& pr, const DktField& init, double tol = 1e-12,
                         int max_iter = 100);

/// Transfers multipliers to a refined mesh: inherited nodes copy, edge
/// midpoints average the free endpoints.
Eigen::VectorXd prolongate_multipliers(const Eigen::VectorXd& p, const ProlongationMap& map,
                                       const DofMap& coarse, const DofMap& fine);

}  // namespace isoshell
