#include "isoshell/experiments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isoshell {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 flat_chart(const Vec2& x) { return Vec3(x[0], x[1], 0.0); }

Mat32 flat_grad(const Vec2&) {
  Mat32 g;
  g << 1, 0, 0, 1, 0, 0;
  return g;
}

Vec3 cylinder_chart(const Vec2& x) {
  return Vec3(std::sin(kPi * x[0]) / kPi, x[1], std::cos(kPi * x[0]) / kPi);
}

Mat32 cylinder_grad(const Vec2& x) {
  Mat32 g;
  g << std::cos(kPi * x[0]), 0, 0, 1, -std::sin(kPi * x[0]), 0;
  return g;
}

Vec3 saddle_chart(const Vec2& x) {
  const double u = x[0] - 0.5;
  const double v = x[1] - 0.5;
  return Vec3(x[0], x[1], 0.5 * (u * u - v * v));
}

Mat32 saddle_grad(const Vec2& x) {
  Mat32 g;
  g << 1, 0, 0, 1, x[0] - 0.5, -(x[1] - 0.5);
  return g;
}

const Segment kLeftEdge{Vec2(0, 0), Vec2(0, 1)};
const Segment kRightEdge{Vec2(1, 0), Vec2(1, 1)};

}  // namespace

ExampleSpec example_spec(int id) {
  ExampleSpec s;
  s.id = id;
  switch (id) {
    case 1:
      s.chart = flat_chart;
      s.chart_grad = flat_grad;
      s.dirichlet = {kLeftEdge};
      s.load_f1 = [](const Vec2&) { return Vec3(0, 0, -0.1); };
      s.isometric_chart = true;
      break;
    case 2:
      s.chart = cylinder_chart;
      s.chart_grad = cylinder_grad;
      s.dirichlet = {kLeftEdge};
      s.load_f1 = [](const Vec2&) { return Vec3(0, 1, 0); };
      s.load_f2 = [](const Vec2& x) {
        return (x[0] <= 0.5 && x[1] >= 0.5) ? Vec3(-8, 1, 0) : Vec3(0, 1, 0);
      };
      s.isometric_chart = true;
      break;
    case 3:
      s.chart = saddle_chart;
      s.chart_grad = saddle_grad;
      s.dirichlet = {kLeftEdge};
      s.load_f1 = [](const Vec2&) { return Vec3(0, 0, -1); };
      s.load_f2 = [](const Vec2&) { return Vec3(0, 0, -2.5); };
      s.curvature_vs_finest = true;
      break;
    case 4:
      s.domain = Domain::l_shape;
      s.chart = saddle_chart;
      s.chart_grad = saddle_grad;
      s.dirichlet = {Segment{Vec2(1, 0.5), Vec2(1, 1)}};
      s.load_f1 = [](const Vec2&) { return Vec3(0, 0, -1); };
      s.load_f2 = [](const Vec2& x) {
        return (x[0] <= 0.5 && x[1] <= 0.5) ? Vec3(-5, 0, -2) : Vec3(0, 0, -2);
      };
      s.curvature_vs_finest = true;
      break;
    case 5:
      s.chart = saddle_chart;
      s.chart_grad = saddle_grad;
      s.dirichlet = {kLeftEdge, kRightEdge};
      s.load_f1 = [](const Vec2&) { return Vec3::Zero().eval(); };
      // the two clamped edges are pushed toward each other by 3/16
      s.bc_value = [](const Vec2& x) {
        const double shift = (x[0] < 0.5) ? 3.0 / 16.0 : -3.0 / 16.0;
        return (saddle_chart(x) + Vec3(shift, 0, 0)).eval();
      };
      s.curvature_vs_finest = true;
      break;
    default:
      throw std::invalid_argument("example id must be in 1..5");
  }
  return s;
}

ContinuationResult continuation_solve(const ExampleSpec& spec, LoadVariant variant, int levels,
                                      double tol, int max_iter, bool lumped_constraint_scaling) {
  if (levels < 1) throw std::invalid_argument("need at least one level");
  if (variant == LoadVariant::f2 && !spec.load_f2) {
    throw std::invalid_argument("this example has no second load variant");
  }

  ContinuationResult out;
  out.load.f = (variant == LoadVariant::f1) ? spec.load_f1 : spec.load_f2;
  out.load.alpha = spec.alpha;
  out.bc.value = spec.bc_value ? spec.bc_value : spec.chart;
  out.bc.grad = spec.chart_grad;

  for (int l = 0; l < levels; ++l) {
    auto ld = std::make_unique<LevelData>();
    if (l == 0) {
      ld->mesh = build_initial_mesh(spec.domain, spec.dirichlet);
    } else {
      auto [fine, map] = red_refine(out.levels.back()->mesh);
      ld->mesh = std::move(fine);
      ld->from_coarse = std::move(map);
    }
    ld->basis = std::make_unique<BasisCache>(ld->mesh);
    ld->psiA_h = dkt_interpolate(spec.chart, spec.chart_grad, ld->mesh);
    ld->surface = build_surface_cache(ld->psiA_h, *ld->basis);
    ld->dofs = make_dof_map(ld->mesh, lumped_constraint_scaling);

    Problem pr;
    pr.mesh = &ld->mesh;
    pr.basis = ld->basis.get();
    pr.surface = &ld->surface;
    pr.dofs = &ld->dofs;
    pr.psiA_h = &ld->psiA_h;
    pr.load = out.load;
    pr.bc = out.bc;

    DktField init = DktField::zero(ld->mesh);
    Eigen::VectorXd p_init;
    if (l == 0) {
      init = ld->psiA_h;
      p_init = Eigen::VectorXd::Zero(ld->dofs.n_multiplier());
    } else {
      const LevelData& prev = *out.levels.back();
      init = prolongate(out.solves.back().psi, ld->from_coarse, *prev.basis, ld->mesh);
      p_init = prolongate_multipliers(out.solves.back().multipliers, ld->from_coarse, prev.dofs,
                                      ld->dofs);
    }
    init = apply_dirichlet(std::move(init), ld->mesh, out.bc);

    out.levels.push_back(std::move(ld));
    out.solves.push_back(newton_solve(pr, init, p_init, tol, max_iter));
  }
  return out;
}

namespace {

/// Sum of w_q * |2 area| * f(t, q) over all cache points of the mesh.
double integrate_qp(const Mesh& m, const std::function<double(int, int, const Vec3&)>& f) {
  const QuadRule& rule = rule_degree6();
  double acc = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double det = 2.0 * m.signed_area(t);
    for (int q = 0; q < QuadRule::n; ++q) {
      acc += rule.weight[q] * det * f(t, q, rule.bary[q]);
    }
  }
  return acc;
}

Vec2 physical_point(const Mesh& m, int t, const Vec3& bary) {
  const auto& tri = m.triangles[t];
  return bary[0] * m.vertices[tri[0]] + bary[1] * m.vertices[tri[1]] + bary[2] * m.vertices[tri[2]];
}

double curvature_at(const DktField& psi, const BasisCache& bc, int t, const Vec3& bary) {
  const Mat32 J = eval_grad(psi, bc, t, bary);
  const std::array<Mat2, 3> H = grad_theta(psi, bc, t, bary);
  const FirstSecondForms forms = forms_from_jacobian_hessian(J, H);
  return gauss_curvature(forms.g, forms.II);
}

}  // namespace

double isometry_error(const DktField& psi, const BasisCache& bc,
                      const std::function<Mat32(const Vec2&)>& chart_grad) {
  const Mesh& m = bc.mesh();
  return integrate_qp(m, [&](int t, int, const Vec3& bary) {
    const Mat32 J = eval_grad(psi, bc, t, bary);
    const Mat32 DA = chart_grad(physical_point(m, t, bary));
    return ((J.transpose() * J - DA.transpose() * DA).norm());
  });
}

double curvature_norm(const DktField& psi, const BasisCache& bc) {
  return integrate_qp(bc.mesh(), [&](int t, int, const Vec3& bary) {
    return std::abs(curvature_at(psi, bc, t, bary));
  });
}

double curvature_diff(const DktField& a, const DktField& b, const BasisCache& bc) {
  return integrate_qp(bc.mesh(), [&](int t, int, const Vec3& bary) {
    return std::abs(curvature_at(a, bc, t, bary) - curvature_at(b, bc, t, bary));
  });
}

double hessian_error(const DktField& a, const DktField& b, const BasisCache& bc) {
  const double sq = integrate_qp(bc.mesh(), [&](int t, int, const Vec3& bary) {
    const std::array<Mat2, 3> Ha = grad_theta(a, bc, t, bary);
    const std::array<Mat2, 3> Hb = grad_theta(b, bc, t, bary);
    double s = 0.0;
    for (int m = 0; m < 3; ++m) s += (Ha[m] - Hb[m]).squaredNorm();
    return s;
  });
  return std::sqrt(sq);
}

static Vec3 bary_in_triangle(const Mesh& m, int t, const Vec2& x) {
  const auto& tri = m.triangles[t];
  const Vec2& a = m.vertices[tri[0]];
  Mat2 M;
  M.col(0) = m.vertices[tri[1]] - a;
  M.col(1) = m.vertices[tri[2]] - a;
  const Vec2 s = M.inverse() * (x - a);
  return Vec3(1.0 - s[0] - s[1], s[0], s[1]);
}

double curvature_diff_nested(const DktField& coarse, const BasisCache& coarse_bc,
                             const DktField& fine, const BasisCache& fine_bc) {
  const Mesh& fm = fine_bc.mesh();
  const Mesh& cm = coarse_bc.mesh();
  if (fm.level < cm.level) throw std::invalid_argument("fine mesh is coarser than reference");
  const int gap = 2 * (fm.level - cm.level);
  return integrate_qp(fm, [&](int t, int, const Vec3& bary) {
    const int tc = t >> gap;
    const Vec3 cb = bary_in_triangle(cm, tc, physical_point(fm, t, bary));
    return std::abs(curvature_at(coarse, coarse_bc, tc, cb) - curvature_at(fine, fine_bc, t, bary));
  });
}

double hessian_error_nested(const DktField& coarse, const BasisCache& coarse_bc,
                            const DktField& fine, const BasisCache& fine_bc) {
  const Mesh& fm = fine_bc.mesh();
  const Mesh& cm = coarse_bc.mesh();
  if (fm.level < cm.level) throw std::invalid_argument("fine mesh is coarser than reference");
  const int gap = 2 * (fm.level - cm.level);
  const double sq = integrate_qp(fm, [&](int t, int, const Vec3& bary) {
    const int tc = t >> gap;
    const Vec3 cb = bary_in_triangle(cm, tc, physical_point(fm, t, bary));
    const std::array<Mat2, 3> Ha = grad_theta(coarse, coarse_bc, tc, cb);
    const std::array<Mat2, 3> Hb = grad_theta(fine, fine_bc, t, bary);
    double s = 0.0;
    for (int m = 0; m < 3; ++m) s += (Ha[m] - Hb[m]).squaredNorm();
    return s;
  });
  return std::sqrt(sq);
}

DktField prolongate_to_finest(const ContinuationResult& run, int from) {
  const int last = static_cast<int>(run.levels.size()) - 1;
  DktField f = run.solves[from].psi;
  for (int l = from + 1; l <= last; ++l) {
    f = prolongate(f, run.levels[l]->from_coarse, *run.levels[l - 1]->basis, run.levels[l]->mesh);
  }
  return f;
}

std::vector<ConvergenceRow> convergence_table(const ExampleSpec& spec,
                                              const ContinuationResult& run) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int n = static_cast<int>(run.levels.size());
  const LevelData& finest = *run.levels[n - 1];
  const DktField& psi_finest = run.solves[n - 1].psi;

  std::vector<ConvergenceRow> rows;
  rows.reserve(n);
  for (int l = 0; l < n; ++l) {
    const LevelData& ld = *run.levels[l];
    ConvergenceRow row;
    row.level = ld.mesh.level;
    // The tables list the grid size as half the longest edge of the mesh.
    row.h = 0.5 * ld.mesh.h;
    // Tabulated energy convention: -2 times the discrete total energy. For
    // charts with unit first fundamental form the energy of the discrete rest
    // state (the equilibrium without load, which carries the undeformed load
    // potential) is subtracted, so the value measures the energy stored by
    // deforming; for curved-metric charts the undeformed potential vanishes
    // by symmetry and the absolute energy is reported.
    double e = total_energy(run.solves[l].psi, *ld.basis, ld.surface, run.load);
    if (spec.isometric_chart) {
      Load zero;
      zero.f = [](const Vec2&) { return Vec3::Zero().eval(); };
      zero.alpha = run.load.alpha;
      const Problem pr{&ld.mesh,  ld.basis.get(), &ld.surface, &ld.dofs,
                       &ld.psiA_h, zero,          run.bc};
      const SolveResult rest = newton_solve(pr, ld.psiA_h, 1e-12, 60);
      e -= total_energy(rest.psi, *ld.basis, ld.surface, run.load);
    }
    row.energy = -2.0 * e;
    row.iso_err = isometry_error(run.solves[l].psi, *ld.basis, spec.chart_grad);
    if (l < n - 1) {
      row.hess_err =
          hessian_error_nested(run.solves[l].psi, *ld.basis, psi_finest, *finest.basis);
      row.curv = spec.curvature_vs_finest
                     ? curvature_diff_nested(run.solves[l].psi, *ld.basis, psi_finest,
                                             *finest.basis)
                     : curvature_norm(run.solves[l].psi, *ld.basis);
    } else {
      row.hess_err = nan;
      row.curv = spec.curvature_vs_finest ? nan : curvature_norm(run.solves[l].psi, *ld.basis);
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentRun run_example(const ExampleSpec& spec, LoadVariant variant, int levels, double tol,
                          int max_iter, bool lumped_constraint_scaling) {
  ExperimentRun out;
  out.chain = continuation_solve(spec, variant, levels, tol, max_iter, lumped_constraint_scaling);
  out.rows = convergence_table(spec, out.chain);
  return out;
}

}  // namespace isoshell
