#pragma once

#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "isoshell/geometry.hpp"

namespace isoshell {

using SparseMat = Eigen::SparseMatrix<double>;

/// Force density on the parameter domain plus the elastic constant.
struct Load {
  std::function<Vec3(const Vec2&)> f;
  double alpha = 1.0 / 12.0;
};

/// Indexing of the free (non-Dirichlet) degrees of freedom.
/// Primal dof of (node, component m, slot k) with k in {value, d1, d2}:
///   9 * free_index[node] + 3 * m + k.
/// Constraint/multiplier dof of (node, entry i) with i in {c11, c12, c22}:
///   3 * free_index[node] + i.
struct DofMap {
  const Mesh* mesh = nullptr;
  std::vector<int> free_index;  // -1 for Dirichlet nodes
  std::vector<int> free_nodes;
  std::vector<double> constraint_weight;  // per free node, all 1 by default

  int n_free_nodes() const { return static_cast<int>(free_nodes.size()); }
  int n_primal() const { return 9 * n_free_nodes(); }
  int n_multiplier() const { return 3 * n_free_nodes(); }
};

/// With lumped_area_scaling the constraint rows of each node are weighted by
/// its lumped mass (one third of the adjacent triangle area).
DofMap make_dof_map(const Mesh& m, bool lumped_area_scaling = false);

/// Discrete transformed bending energy density at one reference cache point.
double bending_density(const SurfaceCache::Point& p, const std::array<Mat2, 3>& grad_theta_psi,
                       const Vec3& n_psi);

double total_energy(const DktField& psi, const BasisCache& bc, const SurfaceCache& sc,
                    const Load& load);

Eigen::VectorXd energy_gradient(const DktField& psi, const BasisCache& bc, const SurfaceCache& sc,
                                const Load& load, const DofMap& dm);

SparseMat energy_hessian(const DktField& psi, const BasisCache& bc, const SurfaceCache& sc,
                         const Load& load, const DofMap& dm);

Vec3 normal_first_variation(const Mat32& J_psi, const Mat32& J_v);
Vec3 normal_second_variation(const Mat32& J_psi, const Mat32& J_v, const Mat32& J_w);

/// Nodal metric residual (c11, c12, c22) per free node.
Eigen::VectorXd constraint_residual(const DktField& psi, const DktField& psiA, const DofMap& dm);

SparseMat constraint_jacobian(const DktField& psi, const DofMap& dm);

/// Second variation of G_h contracted with the multiplier p (constant in psi).
SparseMat constraint_hessian_apply(const Eigen::VectorXd& p, const DofMap& dm);

}  // namespace isoshell
