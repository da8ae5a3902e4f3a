#include "isoshell/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace isoshell {

DofMap make_dof_map(const Mesh& m, bool lumped_area_scaling) {
  DofMap dm;
  dm.mesh = &m;
  dm.free_index.assign(m.num_vertices(), -1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.is_dirichlet[v]) {
      dm.free_index[v] = static_cast<int>(dm.free_nodes.size());
      dm.free_nodes.push_back(v);
    }
  }
  dm.constraint_weight.assign(dm.free_nodes.size(), 1.0);
  if (lumped_area_scaling) {
    std::vector<double> lumped(m.num_vertices(), 0.0);
    for (int t = 0; t < m.num_triangles(); ++t) {
      const double third = m.signed_area(t) / 3.0;
      for (int v : m.triangles[t]) lumped[v] += third;
    }
    for (int fi = 0; fi < dm.n_free_nodes(); ++fi) {
      dm.constraint_weight[fi] = lumped[dm.free_nodes[fi]];
    }
  }
  return dm;
}

double bending_density(const SurfaceCache::Point& p, const std::array<Mat2, 3>& H,
                       const Vec3& n) {
  double q = 0.0;
  Mat2 Hn = Mat2::Zero();
  for (int m = 0; m < 3; ++m) {
    q += (p.g_inv_sqrt * H[m] * p.g_inv_sqrt).squaredNorm();
    Hn += n[m] * H[m];
  }
  q -= 2.0 * Hn.cwiseProduct(p.cross_tensor).sum();
  return q;
}

namespace {

// Per-quadrature-point state of the deformed configuration.
struct QpState {
  Mat32 J;
  Vec3 psi;
  std::array<Mat2, 3> H;
  Vec3 n;
  Mat2 g_psi_inv;
};

QpState qp_state(const ElementBasis::QuadTables& tab, int q, const std::array<Vec9, 3>& dofs) {
  QpState s;
  for (int c = 0; c < 3; ++c) {
    s.J.row(c) = (tab.grad[q] * dofs[c]).transpose();
    s.psi[c] = tab.val[q] * dofs[c];
    s.H[c].setZero();
    for (int j = 0; j < 9; ++j) s.H[c] += dofs[c][j] * tab.grad_theta[q][j];
  }
  const Vec3 cross = s.J.col(0).cross(s.J.col(1));
  const double len = cross.norm();
  if (len <= kDegenerateJacobianTol) throw std::runtime_error("degenerate deformed Jacobian");
  s.n = cross / len;
  s.g_psi_inv = (s.J.transpose() * s.J).inverse();
  return s;
}

// Energy, gradient and (optionally) Hessian contributions of one element.
// Local dof index: 9*m + j with j the scalar-element dof.
struct ElementWork {
  double energy = 0.0;
  Eigen::Matrix<double, 27, 1> grad = Eigen::Matrix<double, 27, 1>::Zero();
  Eigen::Matrix<double, 27, 27> hess = Eigen::Matrix<double, 27, 27>::Zero();
};

void element_energy(const ElementBasis& basis, const std::array<SurfaceCache::Point, 12>& pts,
                    const std::array<Vec9, 3>& dofs, const Load& load, bool want_grad,
                    bool want_hess, ElementWork& out) {
  const auto& tab = basis.tables();
  const double alpha = load.alpha;

  for (int q = 0; q < QuadRule::n; ++q) {
    const SurfaceCache::Point& p = pts[q];
    const QpState s = qp_state(tab, q, dofs);
    const double wsd = p.weight * p.sqrt_det_g;
    const Vec3 fx = load.f ? load.f(p.x) : Vec3::Zero();

    out.energy += wsd * (0.5 * alpha * bending_density(p, s.H, s.n) - fx.dot(s.psi));
    if (!want_grad && !want_hess) continue;

    // shared per-dof quantities
    std::array<Mat2, 3> A;  // g^{-1} H^m g^{-1}
    Vec3 d;                 // H^m : T
    for (int m = 0; m < 3; ++m) {
      A[m] = p.g_inv * s.H[m] * p.g_inv;
      d[m] = s.H[m].cwiseProduct(p.cross_tensor).sum();
    }
    Eigen::Matrix<double, 2, 9> ginv_grad = s.g_psi_inv * tab.grad[q];
    Eigen::Matrix<double, 3, 9> u = s.J * ginv_grad;  // J g^{-1} grad b_j
    Eigen::Matrix<double, 1, 9> ctheta;
    std::array<double, 27> agdot;  // A^m : Gtheta_j
    for (int j = 0; j < 9; ++j) {
      ctheta[j] = tab.grad_theta[q][j].cwiseProduct(p.cross_tensor).sum();
      for (int m = 0; m < 3; ++m)
        agdot[9 * m + j] = A[m].cwiseProduct(tab.grad_theta[q][j]).sum();
    }

    if (want_grad) {
      for (int m = 0; m < 3; ++m) {
        for (int j = 0; j < 9; ++j) {
          const double bend =
              alpha * (agdot[9 * m + j] - s.n[m] * ctheta[j] + s.n[m] * u.col(j).dot(d));
          out.grad[9 * m + j] += wsd * (bend - fx[m] * tab.val[q][j]);
        }
      }
    }

    if (want_hess) {
      Eigen::Matrix<double, 9, 9> K = tab.grad[q].transpose() * ginv_grad;
      Eigen::Matrix<double, 9, 9> M1;
      for (int j = 0; j < 9; ++j) {
        const Mat2 P = p.g_inv * tab.grad_theta[q][j] * p.g_inv;
        for (int k = 0; k <= j; ++k) {
          M1(j, k) = M1(k, j) = 2.0 * P.cwiseProduct(tab.grad_theta[q][k]).sum();
        }
      }
      const Vec3 Pd = s.J * (s.g_psi_inv * (s.J.transpose() * d));
      Eigen::Matrix<double, 1, 9> ud = d.transpose() * u;  // u_j . d

      const double c = wsd * 0.5 * alpha;
      for (int la = 0; la < 27; ++la) {
        const int m = la / 9, j = la % 9;
        for (int lb = la; lb < 27; ++lb) {
          const int r = lb / 9, k = lb % 9;
          double t = (m == r) ? M1(j, k) : 0.0;
          t += 2.0 * (s.n[r] * u(m, k) * ctheta[j] + s.n[m] * u(r, j) * ctheta[k]);
          t += 2.0 * s.n[m] * K(k, j) * (d[r] - Pd[r]);
          t -= 2.0 * (s.n[m] * u(r, j) * ud[k] + s.n[r] * u(m, k) * ud[j]);
          out.hess(la, lb) += c * t;
          if (lb != la) out.hess(lb, la) += c * t;
        }
      }
    }
  }
}

std::array<Vec9, 3> field_dofs(const DktField& psi, const Mesh& m, int t) {
  return {local_dofs(psi.comp[0], m, t), local_dofs(psi.comp[1], m, t),
          local_dofs(psi.comp[2], m, t)};
}

// Global primal dof of local (m, j) on triangle t, or -1 if Dirichlet.
int scatter_index(const Mesh& m, const DofMap& dm, int t, int la) {
  const int comp = la / 9, j = la % 9;
  const int v = m.triangles[t][j / 3];
  const int fi = dm.free_index[v];
  if (fi < 0) return -1;
  return 9 * fi + 3 * comp + (j % 3);
}

}  // namespace

double total_energy(const DktField& psi, const BasisCache& bc, const SurfaceCache& sc,
                    const Load& load) {
  const Mesh& m = bc.mesh();
  if (psi.mesh() != &m || sc.mesh != &m) throw std::invalid_argument("total_energy mesh mismatch");
  double e = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    ElementWork w;
    element_energy(bc[t], sc.tri[t], field_dofs(psi, m, t), load, false, false, w);
    e += w.energy;
  }
  return e;
}

Eigen::VectorXd energy_gradient(const DktField& psi, const BasisCache& bc, const SurfaceCache& sc,
                                const Load& load, const DofMap& dm) {
  const Mesh& m = bc.mesh();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dm.n_primal());
  for (int t = 0; t < m.num_triangles(); ++t) {
    ElementWork w;
    element_energy(bc[t], sc.tri[t], field_dofs(psi, m, t), load, true, false, w);
    for (int la = 0; la < 27; ++la) {
      const int gi = scatter_index(m, dm, t, la);
      if (gi >= 0) g[gi] += w.grad[la];
    }
  }
  return g;
}

SparseMat energy_hessian(const DktField& psi, const BasisCache& bc, const SurfaceCache& sc,
                         const Load& load, const DofMap& dm) {
  const Mesh& m = bc.mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(m.num_triangles()) * 27 * 27);
  for (int t = 0; t < m.num_triangles(); ++t) {
    ElementWork w;
    element_energy(bc[t], sc.tri[t], field_dofs(psi, m, t), load, false, true, w);
    for (int la = 0; la < 27; ++la) {
      const int gi = scatter_index(m, dm, t, la);
      if (gi < 0) continue;
      for (int lb = 0; lb < 27; ++lb) {
        const int gj = scatter_index(m, dm, t, lb);
        if (gj >= 0) trip.emplace_back(gi, gj, w.hess(la, lb));
      }
    }
  }
  SparseMat h(dm.n_primal(), dm.n_primal());
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

Vec3 normal_first_variation(const Mat32& J_psi, const Mat32& J_v) {
  const Vec3 cross = J_psi.col(0).cross(J_psi.col(1));
  if (cross.norm() <= kDegenerateJacobianTol)
    throw std::runtime_error("normal variation: rank-deficient Jacobian");
  const Vec3 n = cross.normalized();
  const Mat2 g_inv = (J_psi.transpose() * J_psi).inverse();
  return -J_psi * (g_inv * (J_v.transpose() * n));
}

Vec3 normal_second_variation(const Mat32& J_psi, const Mat32& J_v, const Mat32& J_w) {
  const Vec3 cross = J_psi.col(0).cross(J_psi.col(1));
  if (cross.norm() <= kDegenerateJacobianTol)
    throw std::runtime_error("normal variation: rank-deficient Jacobian");
  const Vec3 n = cross.normalized();
  const Mat2 g_inv = (J_psi.transpose() * J_psi).inverse();
  const Mat2 dg = J_w.transpose() * J_psi + J_psi.transpose() * J_w;
  const Mat2 dg_inv = -g_inv * dg * g_inv;
  const Vec3 dn_w = -J_psi * (g_inv * (J_w.transpose() * n));
  return -J_w * (g_inv * (J_v.transpose() * n)) - J_psi * (dg_inv * (J_v.transpose() * n)) -
         J_psi * (g_inv * (J_v.transpose() * dn_w));
}

Eigen::VectorXd constraint_residual(const DktField& psi, const DktField& psiA, const DofMap& dm) {
  if (psi.mesh() != dm.mesh || psiA.mesh() != dm.mesh)
    throw std::invalid_argument("constraint_residual mesh mismatch");
  Eigen::VectorXd r(dm.n_multiplier());
  for (int fi = 0; fi < dm.n_free_nodes(); ++fi) {
    const int v = dm.free_nodes[fi];
    const Mat32 J = psi.grad_at(v);
    const Mat32 JA = psiA.grad_at(v);
    const Mat2 G = J.transpose() * J - JA.transpose() * JA;
    const double w = dm.constraint_weight[fi];
    r[3 * fi] = w * G(0, 0);
    r[3 * fi + 1] = w * G(0, 1);
    r[3 * fi + 2] = w * G(1, 1);
  }
  return r;
}

SparseMat constraint_jacobian(const DktField& psi, const DofMap& dm) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(dm.n_free_nodes()) * 12);
  for (int fi = 0; fi < dm.n_free_nodes(); ++fi) {
    const int v = dm.free_nodes[fi];
    const Mat32 J = psi.grad_at(v);
    const double w = dm.constraint_weight[fi];
    for (int m = 0; m < 3; ++m) {
      const int d1 = 9 * fi + 3 * m + 1;
      const int d2 = 9 * fi + 3 * m + 2;
      trip.emplace_back(3 * fi, d1, w * 2.0 * J(m, 0));
      trip.emplace_back(3 * fi + 1, d1, w * J(m, 1));
      trip.emplace_back(3 * fi + 1, d2, w * J(m, 0));
      trip.emplace_back(3 * fi + 2, d2, w * 2.0 * J(m, 1));
    }
  }
  SparseMat jac(dm.n_multiplier(), dm.n_primal());
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

SparseMat constraint_hessian_apply(const Eigen::VectorXd& p, const DofMap& dm) {
  if (p.size() != dm.n_multiplier())
    throw std::invalid_argument("multiplier size mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(dm.n_free_nodes()) * 12);
  for (int fi = 0; fi < dm.n_free_nodes(); ++fi) {
    const double w = dm.constraint_weight[fi];
    // hessian of p . c per component row of the jacobian: the off-diagonal
    // metric entry appears once in c, so its quadratic form carries 1/2
    Mat2 pm;
    pm << w * p[3 * fi], 0.5 * w * p[3 * fi + 1], 0.5 * w * p[3 * fi + 1], w * p[3 * fi + 2];
    for (int m = 0; m < 3; ++m) {
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          trip.emplace_back(9 * fi + 3 * m + 1 + k, 9 * fi + 3 * m + 1 + l, 2.0 * pm(k, l));
        }
      }
    }
  }
  SparseMat h(dm.n_primal(), dm.n_primal());
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

}  // namespace isoshell
