#include "isoshell/solver.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace isoshell {

DktField apply_dirichlet(DktField psi, const Mesh& m, const BoundaryData& bc) {
  if (psi.mesh() != &m) throw std::invalid_argument("apply_dirichlet mesh mismatch");
  if (!bc.value || !bc.grad) throw std::invalid_argument("missing boundary data");
  for (int v : m.dirichlet_nodes) {
    const Vec3 val = bc.value(m.vertices[v]);
    const Mat32 g = bc.grad(m.vertices[v]);
    for (int c = 0; c < 3; ++c) {
      psi.comp[c].value[v] = val[c];
      psi.comp[c].grad.row(v) = g.row(c);
    }
  }
  return psi;
}

Eigen::VectorXd kkt_residual(const DktField& psi, const Eigen::VectorXd& p, const Problem& pr) {
  const DofMap& dm = *pr.dofs;
  Eigen::VectorXd F(dm.n_primal() + dm.n_multiplier());
  const SparseMat jac = constraint_jacobian(psi, dm);
  F.head(dm.n_primal()) =
      energy_gradient(psi, *pr.basis, *pr.surface, pr.load, dm) - jac.transpose() * p;
  F.tail(dm.n_multiplier()) = -constraint_residual(psi, *pr.psiA_h, dm);
  return F;
}

KktSystem assemble_kkt(const DktField& psi, const Eigen::VectorXd& p, const Problem& pr) {
  const DofMap& dm = *pr.dofs;
  const int np = dm.n_primal();
  const int nc = dm.n_multiplier();

  const SparseMat hess =
      energy_hessian(psi, *pr.basis, *pr.surface, pr.load, dm) - constraint_hessian_apply(p, dm);
  const SparseMat jac = constraint_jacobian(psi, dm);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(hess.nonZeros() + 2 * jac.nonZeros());
  for (int k = 0; k < hess.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(hess, k); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int k = 0; k < jac.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(jac, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      trip.emplace_back(np + r, c, -it.value());
      trip.emplace_back(c, np + r, -it.value());
    }
  }
  KktSystem sys;
  sys.mat.resize(np + nc, np + nc);
  sys.mat.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = -kkt_residual(psi, p, pr);
  return sys;
}

namespace {

DktField advance(const DktField& psi, const DofMap& dm, const Eigen::VectorXd& delta, double s) {
  DktField out = psi;
  for (int fi = 0; fi < dm.n_free_nodes(); ++fi) {
    const int v = dm.free_nodes[fi];
    for (int m = 0; m < 3; ++m) {
      out.comp[m].value[v] += s * delta[9 * fi + 3 * m];
      out.comp[m].grad(v, 0) += s * delta[9 * fi + 3 * m + 1];
      out.comp[m].grad(v, 1) += s * delta[9 * fi + 3 * m + 2];
    }
  }
  return out;
}

}  // namespace

SolveResult newton_solve(const Problem& pr, const DktField& init, const Eigen::VectorXd& p_init,
                         double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  const DofMap& dm = *pr.dofs;
  const int np = dm.n_primal();
  const int nc = dm.n_multiplier();
  const bool debug = std::getenv("ISOSHELL_DEBUG") != nullptr;

  SolveResult res;
  res.psi = init;
  res.multipliers = p_init;
  if (np == 0) {
    res.converged = true;
    return res;
  }

  auto theta_of = [&](const DktField& psi) {
    return constraint_residual(psi, *pr.psiA_h, dm).lpNorm<1>();
  };
  auto energy_of = [&](const DktField& psi) {
    return total_energy(psi, *pr.basis, *pr.surface, pr.load);
  };

  // Least-squares multiplier estimate at the starting point; an inherited
  // multiplier guess can dominate the KKT residual and distort the first
  // Newton steps.
  auto estimate_multipliers = [&]() {
    const SparseMat jac = constraint_jacobian(res.psi, dm);
    const Eigen::VectorXd grad_e = energy_gradient(res.psi, *pr.basis, *pr.surface, pr.load, dm);
    const SparseMat jjt = SparseMat(jac * jac.transpose());
    SparseMat eye(nc, nc);
    eye.setIdentity();
    const double scale = std::max(1e-300, jjt.coeffs().abs().maxCoeff());
    Eigen::SimplicialLDLT<SparseMat> ldlt(jjt + (1e-12 * scale) * eye);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd p_ls = ldlt.solve(jac * grad_e);
    if (!p_ls.allFinite()) return;
    const double r_old = (grad_e - jac.transpose() * res.multipliers).lpNorm<Eigen::Infinity>();
    const double r_new = (grad_e - jac.transpose() * p_ls).lpNorm<Eigen::Infinity>();
    if (r_new < r_old) res.multipliers = p_ls;
  };
  if (nc > 0) estimate_multipliers();

  // Feasibility restoration: Gauss-Newton steps on the constraint residual
  // measured in the energy-Hessian metric — solve
  //   [ H + reg I   -J^T ] [d]   [0]
  //   [   -J         0   ] [q] = [c]
  // which removes the linearized violation with the least energy increase,
  // so the iterate stays in the basin of the current solution branch.
  auto restore_feasibility = [&](double target_theta) {
    bool moved = false;
    for (int rit = 0; rit < 30; ++rit) {
      const Eigen::VectorXd c = constraint_residual(res.psi, *pr.psiA_h, dm);
      if (c.lpNorm<1>() <= target_theta) break;
      const SparseMat hess = energy_hessian(res.psi, *pr.basis, *pr.surface, pr.load, dm);
      const SparseMat jac = constraint_jacobian(res.psi, dm);
      const double hs = std::max(1.0, hess.coeffs().abs().maxCoeff());

      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(hess.nonZeros() + 2 * jac.nonZeros() + np + nc);
      for (int k = 0; k < hess.outerSize(); ++k) {
        for (SparseMat::InnerIterator it(hess, k); it; ++it) {
          trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
      }
      for (int k = 0; k < jac.outerSize(); ++k) {
        for (SparseMat::InnerIterator it(jac, k); it; ++it) {
          const int r = static_cast<int>(it.row());
          const int col = static_cast<int>(it.col());
          trip.emplace_back(np + r, col, -it.value());
          trip.emplace_back(col, np + r, -it.value());
        }
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(np + nc);
      rhs.tail(nc) = c;

      Eigen::VectorXd delta;
      double reg = 0.0;
      bool dir_ok = false;
      while (true) {
        std::vector<Eigen::Triplet<double>> t2 = trip;
        for (int i = 0; i < np; ++i) t2.emplace_back(i, i, reg);
        for (int i = 0; i < nc; ++i) t2.emplace_back(np + i, np + i, -1e-11);
        SparseMat mat(np + nc, np + nc);
        mat.setFromTriplets(t2.begin(), t2.end());
        Eigen::SimplicialLDLT<SparseMat> ldlt(mat);
        if (ldlt.info() == Eigen::Success) {
          delta = ldlt.solve(rhs);
          if (delta.allFinite()) {
            const auto& dv = ldlt.vectorD();
            int n_neg = 0;
            bool degenerate = false;
            for (int i = 0; i < dv.size(); ++i) {
              if (dv[i] < 0.0) ++n_neg;
              if (dv[i] == 0.0 || !std::isfinite(dv[i])) degenerate = true;
            }
            if (!degenerate && n_neg == nc) {
              dir_ok = true;
              break;
            }
          }
        }
        reg = (reg == 0.0) ? 1e-8 * hs : reg * 10.0;
        if (reg > 1e8 * hs) break;
      }
      if (!dir_ok) break;

      const double c2 = c.squaredNorm();
      double s = 1.0;
      bool ok = false;
      while (s >= std::ldexp(1.0, -20)) {
        DktField trial = advance(res.psi, dm, delta.head(np), s);
        double t2 = std::numeric_limits<double>::infinity();
        try {
          t2 = constraint_residual(trial, *pr.psiA_h, dm).squaredNorm();
        } catch (const std::runtime_error&) {
        }
        if (std::isfinite(t2) && t2 < c2 * (1.0 - 1e-4 * s)) {
          res.psi = std::move(trial);
          ok = moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!ok) break;
      if (debug) {
        std::fprintf(stderr, "restore it=%2d s=%.3g reg=%.3g |c|1=%.3e E=%.9g\n", rit, s, reg,
                     theta_of(res.psi), energy_of(res.psi));
      }
    }
    return moved;
  };

  // A prolongated initial guess can violate the nodal constraints
  // substantially; pull it back onto the constraint set first so the main
  // iteration starts from a nearly feasible point of the same branch.
  if (nc > 0 && theta_of(res.psi) > 1e-8) {
    restore_feasibility(1e-10);
    estimate_multipliers();
  }

  // Filter globalization in the (constraint violation, energy) plane,
  // following the standard filter line-search scheme: a trial point must
  // either clearly reduce the violation or clearly reduce the energy, and
  // must stay out of the forbidden region spanned by earlier iterates.
  const double theta_init = theta_of(res.psi);
  const double theta_max = 1e4 * std::max(1.0, theta_init);
  const double theta_min = 1e-4 * std::max(1.0, theta_init);
  const double gamma_theta = 1e-5;
  const double gamma_phi = 1e-8;
  const double eta_phi = 1e-8;
  std::vector<std::pair<double, double>> filter;  // reject if th >= first && E >= second
  filter.emplace_back(theta_max, -std::numeric_limits<double>::infinity());
  auto filter_ok = [&](double th, double en) {
    for (const auto& [tf, ef] : filter) {
      if (th >= tf && en >= ef) return false;
    }
    return true;
  };

  const double tail_threshold = 1e-4;
  Eigen::VectorXd F = kkt_residual(res.psi, res.multipliers, pr);
  res.residual = F.lpNorm<Eigen::Infinity>();
  int restorations_in_a_row = 0;

  for (int iter = 0; iter < max_iter; ++iter) {
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }

    const SparseMat hess = energy_hessian(res.psi, *pr.basis, *pr.surface, pr.load, dm) -
                           constraint_hessian_apply(res.multipliers, dm);
    const SparseMat jac = constraint_jacobian(res.psi, dm);
    const Eigen::VectorXd grad_e = energy_gradient(res.psi, *pr.basis, *pr.surface, pr.load, dm);
    const Eigen::VectorXd c = constraint_residual(res.psi, *pr.psiA_h, dm);
    const double theta = c.lpNorm<1>();
    const double energy = energy_of(res.psi);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(hess.nonZeros() + 2 * jac.nonZeros() + np + nc);
    for (int k = 0; k < hess.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(hess, k); it; ++it) {
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    for (int k = 0; k < jac.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(jac, k); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int col = static_cast<int>(it.col());
        trip.emplace_back(np + r, col, -it.value());
        trip.emplace_back(col, np + r, -it.value());
      }
    }
    Eigen::VectorXd rhs(np + nc);
    rhs.head(np) = -(grad_e - jac.transpose() * res.multipliers);
    rhs.tail(nc) = c;

    const bool tail_phase = res.residual <= tail_threshold;
    const double hess_scale = std::max(1.0, hess.coeffs().abs().maxCoeff());
    const double reg_dual = 1e-11;  // keeps the matrix quasi-definite so the
                                    // unpivoted LDLT and its inertia are valid

    // Direction with inertia correction: the factorization must show np
    // positive and nc negative pivots (minimizer curvature on the constraint
    // tangent space); otherwise shift the Hessian block and refactorize.
    Eigen::VectorXd delta;
    double reg = 0.0;
    bool solved = false;
    while (true) {
      std::vector<Eigen::Triplet<double>> t2 = trip;
      for (int i = 0; i < np; ++i) t2.emplace_back(i, i, reg);
      for (int i = 0; i < nc; ++i) t2.emplace_back(np + i, np + i, -reg_dual);
      SparseMat mat(np + nc, np + nc);
      mat.setFromTriplets(t2.begin(), t2.end());
      Eigen::SimplicialLDLT<SparseMat> ldlt(mat);
      bool ok = false;
      if (ldlt.info() == Eigen::Success) {
        delta = ldlt.solve(rhs);
        ok = delta.allFinite();
        // iterative refinement lowers the attainable residual floor on the
        // finest meshes, where the factorization alone loses a few digits
        for (int r = 0; ok && r < 2; ++r) {
          const Eigen::VectorXd resid = rhs - mat.selfadjointView<Eigen::Lower>() * delta;
          delta += ldlt.solve(resid);
          ok = delta.allFinite();
        }
        if (ok && !tail_phase) {
          const auto& d = ldlt.vectorD();
          int n_neg = 0;
          bool degenerate = false;
          for (int i = 0; i < d.size(); ++i) {
            if (d[i] < 0.0) ++n_neg;
            if (d[i] == 0.0 || !std::isfinite(d[i])) degenerate = true;
          }
          ok = !degenerate && n_neg == nc;
        }
      }
      if (ok) {
        solved = true;
        break;
      }
      reg = (reg == 0.0) ? 1e-8 * hess_scale : reg * 10.0;
      if (reg > 1e8 * hess_scale) break;
    }
    if (!solved) throw std::runtime_error("singular KKT matrix after regularization attempts");

    bool accepted = false;
    double used_s = 1.0;
    const double min_step = std::ldexp(1.0, -25);

    if (tail_phase) {
      // pure Newton finish: backtrack on the max-norm of the KKT residual
      double s = 1.0;
      while (s >= min_step) {
        DktField trial_psi = advance(res.psi, dm, delta.head(np), s);
        Eigen::VectorXd trial_p = res.multipliers + s * delta.tail(nc);
        try {
          Eigen::VectorXd Ft = kkt_residual(trial_psi, trial_p, pr);
          const double mf = Ft.lpNorm<Eigen::Infinity>();
          if (std::isfinite(mf) && mf < res.residual) {
            res.psi = std::move(trial_psi);
            res.multipliers = std::move(trial_p);
            F = std::move(Ft);
            accepted = true;
            used_s = s;
            break;
          }
        } catch (const std::runtime_error&) {
        }
        s *= 0.5;
      }
      res.iterations = iter + 1;
      if (!accepted) {
        // residual floor reached: stop cleanly
        res.residual = F.lpNorm<Eigen::Infinity>();
        res.converged = false;
        return res;
      }
    } else {
      const double dphi = grad_e.dot(delta.head(np));  // energy slope along the step
      double s = 1.0;
      bool f_type_step = false;
      while (s >= min_step) {
        DktField trial_psi = advance(res.psi, dm, delta.head(np), s);
        try {
          const double th_t = theta_of(trial_psi);
          const double en_t = energy_of(trial_psi);
          if (std::isfinite(th_t) && std::isfinite(en_t) && filter_ok(th_t, en_t)) {
            // switching condition: near feasibility with a strong descent
            // direction the step must earn actual energy decrease (Armijo)
            const bool switching =
                dphi < 0.0 && theta <= theta_min &&
                s * std::pow(-dphi, 2.3) > std::pow(theta, 1.1);
            bool ok;
            if (switching) {
              ok = en_t <= energy + eta_phi * s * dphi;
              f_type_step = ok;
            } else {
              ok = th_t <= (1.0 - gamma_theta) * theta || en_t <= energy - gamma_phi * theta;
            }
            if (ok) {
              res.psi = std::move(trial_psi);
              res.multipliers += s * delta.tail(nc);
              accepted = true;
              used_s = s;
              break;
            }
          }
        } catch (const std::runtime_error&) {
          // degenerate trial configuration: treat as rejection
        }
        s *= 0.5;
      }
      res.iterations = iter + 1;
      if (accepted) {
        if (!f_type_step) {
          // iterate accepted on violation progress: block this region
          filter.emplace_back((1.0 - gamma_theta) * theta, energy - gamma_phi * theta);
        }
        restorations_in_a_row = 0;
        F = kkt_residual(res.psi, res.multipliers, pr);
      } else {
        // line search failed: fall back to feasibility restoration
        if (theta <= 1e-10 || restorations_in_a_row > 0) {
          res.residual = F.lpNorm<Eigen::Infinity>();
          res.converged = false;
          return res;
        }
        ++restorations_in_a_row;
        if (debug) {
          std::fprintf(stderr, "it=%3d restoration phase from |c|1=%.3e E=%.9g\n", iter, theta,
                       energy);
        }
        if (!restore_feasibility(std::max(0.1 * theta, 1e-12))) {
          res.residual = F.lpNorm<Eigen::Infinity>();
          res.converged = false;
          return res;
        }
        estimate_multipliers();
        F = kkt_residual(res.psi, res.multipliers, pr);
      }
    }
    res.step_sizes.push_back(used_s);
    res.residual = F.lpNorm<Eigen::Infinity>();
    if (debug) {
      std::fprintf(stderr, "it=%3d %s s=%.3g reg=%.3g |F|inf=%.3e |c|1=%.3e E=%.9g filter=%zu\n",
                   iter, tail_phase ? "tail" : "flt ", used_s, reg, res.residual,
                   theta_of(res.psi), energy_of(res.psi), filter.size());
    }
  }
  res.converged = res.residual <= tol;
  return res;
}

SolveResult newton_solve(const Problem& pr, const DktField& init, double tol, int max_iter) {
  return newton_solve(pr, init, Eigen::VectorXd::Zero(pr.dofs->n_multiplier()), tol, max_iter);
}

Eigen::VectorXd prolongate_multipliers(const Eigen::VectorXd& p, const ProlongationMap& map,
                                       const DofMap& coarse, const DofMap& fine) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(fine.n_multiplier());
  const Mesh& cm = *coarse.mesh;
  for (int fi = 0; fi < fine.n_free_nodes(); ++fi) {
    const int v = fine.free_nodes[fi];
    if (map.from_vertex[v] >= 0) {
      const int cfi = coarse.free_index[map.from_vertex[v]];
      if (cfi >= 0) out.segment<3>(3 * fi) = p.segment<3>(3 * cfi);
    } else {
      const Edge& e = cm.edges[map.from_edge[v]];
      int count = 0;
      Vec3 acc = Vec3::Zero();
      for (int cv : {e.a, e.b}) {
        const int cfi = coarse.free_index[cv];
        if (cfi >= 0) {
          acc += p.segment<3>(3 * cfi);
          ++count;
        }
      }
      if (count > 0) out.segment<3>(3 * fi) = acc / count;
    }
  }
  return out;
}

}  // namespace isoshell
