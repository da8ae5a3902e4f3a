// Acceptance gate: one line per criterion, nonzero exit if any fails.
//
// Reference values are the published convergence tables for the five
// benchmark examples; tolerances are pinned per criterion below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "isoshell/checks.hpp"
#include "isoshell/experiments.hpp"

using namespace isoshell;

namespace {

struct Line {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

const ConvergenceRow* find_row(const std::vector<ConvergenceRow>& rows, double h) {
  for (const ConvergenceRow& r : rows) {
    if (std::abs(r.h - h) <= 1e-9 * h) return &r;
  }
  return nullptr;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

constexpr double kH32 = 1.4142135623730951 / 32.0;
constexpr double kH64 = kH32 / 2.0;
constexpr double kH128 = kH32 / 4.0;

// ---------------------------------------------------------------------------

Line criterion1(const ExperimentRun& ex1, double seconds) {
  Line out;
  const double e_want[3] = {0.00595312, 0.00595271, 0.00595210};
  const double iso_want[3] = {5.332e-05, 1.329e-05, 3.324e-06};
  const double hs[3] = {kH32, kH64, kH128};
  double iso_got[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const ConvergenceRow* r = find_row(ex1.rows, hs[i]);
    if (!r) {
      out.fail(fmt("missing row h=%.4g", hs[i]));
      continue;
    }
    iso_got[i] = r->iso_err;
    if (rel(r->energy, e_want[i]) > 1e-3) {
      out.fail(fmt("energy %.8g vs %.8g at h=%.4g", r->energy, e_want[i], hs[i]));
    }
    if (rel(r->iso_err, iso_want[i]) > 0.15) {
      out.fail(fmt("iso %.4g vs %.4g at h=%.4g", r->iso_err, iso_want[i], hs[i]));
    }
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = iso_got[i] / iso_got[i + 1];
    if (!(ratio >= 3.5 && ratio <= 4.5)) out.fail(fmt("iso ratio %.3g outside [3.5,4.5]", ratio));
  }
  if (seconds > 300.0) out.fail(fmt("runtime %.1fs exceeds 5 minutes", seconds));
  out.note(fmt("runtime %.1fs", seconds));
  return out;
}

Line criterion_hess_trend(const ExperimentRun& ex1) {
  // first-order decay of the hessian error column, measured against the
  // finest level of the run; the unrefined two-triangle row is skipped and
  // only rows at least two levels below the reference carry a trustworthy
  // error
  Line out;
  const int n = static_cast<int>(ex1.rows.size());
  int used = 0;
  for (int l = 1; l + 3 < n; ++l) {
    const double ratio = ex1.rows[l].hess_err / ex1.rows[l + 1].hess_err;
    ++used;
    if (!(ratio >= 1.7 && ratio <= 2.6)) {
      out.fail(fmt("hess ratio %.3g outside [1.7,2.6] at level ", ratio) + std::to_string(l));
    } else {
      out.note(fmt("ratio %.3g", ratio));
    }
  }
  if (used == 0) out.fail("not enough levels for a trend");
  return out;
}

Line criterion_table(const ExperimentRun& run, double e32, double e64, double tol) {
  Line out;
  const ConvergenceRow* r32 = find_row(run.rows, kH32);
  const ConvergenceRow* r64 = find_row(run.rows, kH64);
  if (!r32 || !r64) {
    out.fail("missing tabulated rows");
    return out;
  }
  if (rel(r32->energy, e32) > tol) out.fail(fmt("energy %.6g vs %.6g (h=0.0442)", r32->energy, e32));
  if (rel(r64->energy, e64) > tol) out.fail(fmt("energy %.6g vs %.6g (h=0.0221)", r64->energy, e64));
  out.note(fmt("rel err %.3g, %.3g", rel(r32->energy, e32), rel(r64->energy, e64)));
  return out;
}

Line criterion2(const ExperimentRun& ex2) {
  Line out = criterion_table(ex2, 0.0416, 0.0386, 0.02);
  int monotone = 0;
  for (size_t i = 0; i + 1 < ex2.rows.size(); ++i) {
    if (ex2.rows[i + 1].curv < ex2.rows[i].curv) ++monotone;
  }
  if (monotone < 3) out.fail("curvature norm not decreasing across >=3 levels");
  return out;
}

Line criterion4(const ExperimentRun& ex5) {
  Line out;
  const double want[3] = {0.1025, 0.0441, 0.0168};
  const double hs[3] = {kH32, kH64, kH128};
  double got[3];
  for (int i = 0; i < 3; ++i) {
    const ConvergenceRow* r = find_row(ex5.rows, hs[i]);
    if (!r) {
      out.fail(fmt("missing row h=%.4g", hs[i]));
      return out;
    }
    got[i] = r->iso_err;
    if (rel(r->iso_err, want[i]) > 0.15) {
      out.fail(fmt("iso %.4g vs %.4g at h=%.4g", r->iso_err, want[i], hs[i]));
    }
  }
  if (!(got[0] > got[1] && got[1] > got[2])) out.fail("isometry error not decreasing");
  out.note(fmt("iso %.4g / %.4g", got[0], got[1]) + fmt(" / %.4g", got[2]));
  return out;
}

Line criterion5() {
  Line out;
  double g = 0, h = 0, n1 = 0, n2 = 0;
  for (int id = 1; id <= 5; ++id) {
    const DerivativeErrors e = derivative_fd_errors(id, 20, 20240817u + id);
    g = std::max(g, e.grad);
    h = std::max(h, e.hess);
    n1 = std::max(n1, e.normal_first);
    n2 = std::max(n2, e.normal_second);
  }
  if (g > 1e-6) out.fail(fmt("gradient FD error %.3g", g));
  if (h > 1e-5) out.fail(fmt("hessian FD error %.3g", h));
  if (n1 > 1e-6 || n2 > 1e-6) out.fail(fmt("normal variation FD error %.3g / %.3g", n1, n2));
  out.note(fmt("max errors %.2g / %.2g", g, h) + fmt(" / %.2g", std::max(n1, n2)));
  return out;
}

// L2 interpolation errors of a smooth function and the theta consistency
// ratio of a rough discrete field, per refinement level.
struct OrderSample {
  double e_val, e_grad, e_hess, rough;
};

OrderSample order_sample(const Mesh& m, unsigned seed) {
  auto w = [](const Vec2& x) {
    return std::sin(1.3 * x[0] + 0.4) * std::cos(0.9 * x[1] - 0.2) + 0.3 * x[0] * x[1] * x[1];
  };
  auto dw = [](const Vec2& x) {
    return Vec2(1.3 * std::cos(1.3 * x[0] + 0.4) * std::cos(0.9 * x[1] - 0.2) + 0.3 * x[1] * x[1],
                -0.9 * std::sin(1.3 * x[0] + 0.4) * std::sin(0.9 * x[1] - 0.2) + 0.6 * x[0] * x[1]);
  };
  auto d2w = [](const Vec2& x) {
    const double s = std::sin(1.3 * x[0] + 0.4), c = std::cos(1.3 * x[0] + 0.4);
    const double s2 = std::sin(0.9 * x[1] - 0.2), c2 = std::cos(0.9 * x[1] - 0.2);
    Mat2 H;
    H << -1.69 * s * c2, -1.17 * c * s2 + 0.6 * x[1], -1.17 * c * s2 + 0.6 * x[1],
        -0.81 * s * c2 + 0.6 * x[0];
    return H;
  };

  const BasisCache bc(m);
  const QuadRule& rule = rule_degree6();
  const DktScalarField f = dkt_interpolate(w, dw, m);
  DktScalarField r = DktScalarField::zero(m);
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  for (int v = 0; v < m.num_vertices(); ++v) {
    r.value[v] = gauss(rng);
    r.grad(v, 0) = gauss(rng);
    r.grad(v, 1) = gauss(rng);
  }

  OrderSample out{0, 0, 0, 0};
  double rough_num = 0, rough_den = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double det = 2.0 * m.signed_area(t);
    const auto& tri = m.triangles[t];
    for (int q = 0; q < QuadRule::n; ++q) {
      const Vec3& b = rule.bary[q];
      const Vec2 x = b[0] * m.vertices[tri[0]] + b[1] * m.vertices[tri[1]] +
                     b[2] * m.vertices[tri[2]];
      const double wq = rule.weight[q] * det;
      out.e_val += wq * std::pow(eval(f, bc, t, b) - w(x), 2);
      out.e_grad += wq * (eval_grad(f, bc, t, b) - dw(x)).squaredNorm();
      out.e_hess += wq * (grad_theta(f, bc, t, b) - d2w(x)).squaredNorm();
      rough_num += wq * (theta(r, bc, t, b) - eval_grad(r, bc, t, b)).squaredNorm();
      rough_den += wq * grad_theta(r, bc, t, b).squaredNorm();
    }
  }
  out.e_val = std::sqrt(out.e_val);
  out.e_grad = std::sqrt(out.e_grad);
  out.e_hess = std::sqrt(out.e_hess);
  out.rough = std::sqrt(rough_num / rough_den);
  return out;
}

Line criterion6() {
  Line out;
  const double exact = quadratic_reproduction_error();
  if (exact > 1e-12) out.fail(fmt("quadratic reproduction error %.3g", exact));

  Mesh m = red_refine(build_initial_mesh(Domain::unit_square, {})).first;
  std::vector<OrderSample> s;
  for (int l = 0; l < 4; ++l) {
    s.push_back(order_sample(m, 500 + l));
    if (l < 3) m = red_refine(m).first;
  }
  auto rate = [&](auto field) {
    return 0.5 * (std::log2(field(s[1]) / field(s[2])) + std::log2(field(s[2]) / field(s[3])));
  };
  const double r0 = rate([](const OrderSample& x) { return x.e_val; });
  const double r1 = rate([](const OrderSample& x) { return x.e_grad; });
  const double r2 = rate([](const OrderSample& x) { return x.e_hess; });
  const double rc = rate([](const OrderSample& x) { return x.rough; });
  if (std::abs(r0 - 3.0) > 0.3) out.fail(fmt("value order %.2f", r0));
  if (std::abs(r1 - 2.0) > 0.3) out.fail(fmt("gradient order %.2f", r1));
  if (std::abs(r2 - 1.0) > 0.3) out.fail(fmt("hessian order %.2f", r2));
  if (std::abs(rc - 1.0) > 0.3) out.fail(fmt("consistency order %.2f", rc));
  out.note(fmt("orders %.2f / %.2f", r0, r1) + fmt(" / %.2f, consistency %.2f", r2, rc));
  return out;
}

Line criterion7(const std::vector<const ExperimentRun*>& runs) {
  Line out;
  int converged = 0, total = 0;
  double worst_c = 0.0, worst_kkt = 0.0;
  for (const ExperimentRun* run : runs) {
    for (size_t l = 0; l < run->chain.solves.size(); ++l) {
      const SolveResult& s = run->chain.solves[l];
      ++total;
      if (!s.converged) continue;
      ++converged;
      const LevelData& ld = *run->chain.levels[l];
      const Eigen::VectorXd c = constraint_residual(s.psi, ld.psiA_h, ld.dofs);
      Problem pr{&ld.mesh, ld.basis.get(), &ld.surface, &ld.dofs, &ld.psiA_h, run->chain.load,
                 run->chain.bc};
      const double kkt = kkt_residual(s.psi, s.multipliers, pr).lpNorm<Eigen::Infinity>();
      worst_c = std::max(worst_c, c.lpNorm<Eigen::Infinity>());
      worst_kkt = std::max(worst_kkt, kkt);
    }
  }
  if (worst_c > 1e-10) out.fail(fmt("nodal metric residual %.3g > 1e-10", worst_c));
  if (worst_kkt > 1e-12) out.fail(fmt("KKT residual %.3g > 1e-12", worst_kkt));
  out.note(std::to_string(converged) + " of " + std::to_string(total) + " solves converged" +
           fmt(", worst c=%.2g kkt=%.2g", worst_c, worst_kkt));
  return out;
}

Line criterion8() {
  Line out;
  auto factorial = [](int n) {
    double f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  double worst = 0.0;
  for (int i = 0; i <= 6; ++i) {
    for (int j = 0; i + j <= 6; ++j) {
      const double exact = factorial(i) * factorial(j) / factorial(i + j + 2);
      const double got = integrate(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), [&](const Vec2& x) {
        return std::pow(x[0], i) * std::pow(x[1], j);
      });
      worst = std::max(worst, std::abs(got - exact) / exact);
    }
  }
  if (worst > 1e-14) out.fail(fmt("monomial error %.3g", worst));
  out.note(fmt("max relative error %.2g", worst));
  return out;
}

Line criterion9() {
  Line out;
  for (int id = 1; id <= 5; ++id) {
    const ExampleSpec spec = example_spec(id);
    Mesh m = build_initial_mesh(spec.domain, spec.dirichlet);
    for (int l = 0; l < 3; ++l) m = red_refine(m).first;
    const BasisCache bc(m);
    const DktField psiA = dkt_interpolate(spec.chart, spec.chart_grad, m);
    const SurfaceCache sc = build_surface_cache(psiA, bc);
    const DofMap dm = make_dof_map(m);
    Load zero;
    zero.f = [](const Vec2&) { return Vec3::Zero().eval(); };
    zero.alpha = spec.alpha;
    BoundaryData bcd{spec.chart, spec.chart_grad};  // unmodified clamp
    const Problem pr{&m, &bc, &sc, &dm, &psiA, zero, bcd};
    const SolveResult r = newton_solve(pr, psiA, 1e-12, 50);
    const double de =
        std::abs(total_energy(r.psi, bc, sc, zero) - total_energy(psiA, bc, sc, zero));
    if (!(r.converged && r.iterations == 0 && de <= 1e-12)) {
      out.fail(fmt("example %.0f: %.0f steps, energy change %.2g",
                   static_cast<double>(id), static_cast<double>(r.iterations), de));
    }
  }
  if (!out.pass) {
    out.note(
        "curved charts are not discrete critical points of the transformed "
        "energy (its difference to the squared relative shape operator is "
        "constant over exact isometries only), so the solver legitimately "
        "moves away from the interpolant");
  }
  return out;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Line>> lines;

  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentRun ex1 = run_example(example_spec(1), LoadVariant::f1, 7);
  const double ex1_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const ExperimentRun ex1deep = run_example(example_spec(1), LoadVariant::f1, 8);
  const ExperimentRun ex2 = run_example(example_spec(2), LoadVariant::f1, 6);
  const ExperimentRun ex3 = run_example(example_spec(3), LoadVariant::f1, 6);
  const ExperimentRun ex5 = run_example(example_spec(5), LoadVariant::f1, 7);

  lines.emplace_back("1: plate energies and isometry errors (table, desk scale)",
                     criterion1(ex1, ex1_seconds));
  lines.emplace_back("1b: plate hessian-error first-order trend", criterion_hess_trend(ex1deep));
  lines.emplace_back("2: half-cylinder energies and curvature decay",
                     criterion2(ex2));
  lines.emplace_back("3: saddle energies under vertical load",
                     criterion_table(ex3, 0.3236, 0.2442, 0.02));
  lines.emplace_back("4: prescribed-boundary isometry error trend", criterion4(ex5));
  lines.emplace_back("5: derivative finite-difference oracle suite", criterion5());
  lines.emplace_back("6: element exactness and approximation orders", criterion6());
  lines.emplace_back("7: constraint and KKT residuals of converged solves",
                     criterion7({&ex1, &ex1deep, &ex2, &ex3, &ex5}));
  lines.emplace_back("8: quadrature exactness on degree <= 6", criterion8());
  lines.emplace_back("9: zero-load runs reproduce the undeformed chart", criterion9());

  bool all = true;
  for (const auto& [name, line] : lines) {
    std::printf("[%s] criterion %s%s%s\n", line.pass ? "PASS" : "FAIL", name.c_str(),
                line.detail.empty() ? "" : " — ", line.detail.c_str());
    all = all && line.pass;
  }
  return all ? 0 : 1;
}
