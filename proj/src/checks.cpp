#include "isoshell/checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace isoshell {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// integral of xi^k eta^l over the reference triangle {xi,eta>=0, xi+eta<=1}
double ref_moment(int k, int l) { return factorial(k) * factorial(l) / factorial(k + l + 2); }

}  // namespace

double quadrature_exactness_error() {
  double max_err = 0.0;
  for (int i = 0; i + 0 <= 6; ++i) {
    for (int j = 0; i + j <= 6; ++j) {
      // reference triangle
      const double exact_ref = ref_moment(i, j);
      const double got_ref = integrate(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), [&](const Vec2& x) {
        return std::pow(x[0], i) * std::pow(x[1], j);
      });
      max_err = std::max(max_err, std::abs(got_ref - exact_ref) / std::abs(exact_ref));

      // axis-aligned triangle (1,1)-(3,1)-(1,4): x = 1 + 2 xi, y = 1 + 3 eta
      double exact = 0.0;
      for (int k = 0; k <= i; ++k) {
        for (int l = 0; l <= j; ++l) {
          exact += binom(i, k) * std::pow(2.0, k) * binom(j, l) * std::pow(3.0, l) *
                   ref_moment(k, l);
        }
      }
      exact *= 6.0;  // area Jacobian
      const double got = integrate(Vec2(1, 1), Vec2(3, 1), Vec2(1, 4), [&](const Vec2& x) {
        return std::pow(x[0], i) * std::pow(x[1], j);
      });
      max_err = std::max(max_err, std::abs(got - exact) / std::abs(exact));
    }
  }
  return max_err;
}

double quadratic_reproduction_error() {
  Mesh m = build_initial_mesh(Domain::unit_square, {});
  for (int l = 0; l < 2; ++l) m = red_refine(m).first;
  const BasisCache bc(m);

  // coefficients (c0, cx, cy, cxx, cxy, cyy) of a spanning set of quadratics
  const std::array<std::array<double, 6>, 7> quads = {{{1, 0, 0, 0, 0, 0},
                                                       {0, 1, 0, 0, 0, 0},
                                                       {0, 0, 1, 0, 0, 0},
                                                       {0, 0, 0, 1, 0, 0},
                                                       {0, 0, 0, 0, 1, 0},
                                                       {0, 0, 0, 0, 0, 1},
                                                       {1, 2, -1, 0.5, 1.5, -0.75}}};
  const QuadRule& rule = rule_degree6();

  double max_err = 0.0;
  for (const auto& c : quads) {
    auto p = [&](const Vec2& x) {
      return c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] +
             c[5] * x[1] * x[1];
    };
    auto dp = [&](const Vec2& x) {
      return Vec2(c[1] + 2 * c[3] * x[0] + c[4] * x[1], c[2] + c[4] * x[0] + 2 * c[5] * x[1]);
    };
    Mat2 hess;
    hess << 2 * c[3], c[4], c[4], 2 * c[5];

    const DktScalarField f = dkt_interpolate(p, dp, m);
    for (int t = 0; t < m.num_triangles(); ++t) {
      for (int q = 0; q < QuadRule::n; ++q) {
        const Vec3& bary = rule.bary[q];
        const auto& tri = m.triangles[t];
        const Vec2 x = bary[0] * m.vertices[tri[0]] + bary[1] * m.vertices[tri[1]] +
                       bary[2] * m.vertices[tri[2]];
        max_err = std::max(max_err, (theta(f, bc, t, bary) - dp(x)).norm());
        max_err = std::max(max_err, (grad_theta(f, bc, t, bary) - hess).norm());
      }
    }
  }
  return max_err;
}

namespace {

DktField advance(const DktField& psi, const DofMap& dm, const Eigen::VectorXd& d, double s) {
  DktField out = psi;
  for (int fi = 0; fi < dm.n_free_nodes(); ++fi) {
    const int v = dm.free_nodes[fi];
    for (int m = 0; m < 3; ++m) {
      out.comp[m].value[v] += s * d[9 * fi + 3 * m];
      out.comp[m].grad(v, 0) += s * d[9 * fi + 3 * m + 1];
      out.comp[m].grad(v, 1) += s * d[9 * fi + 3 * m + 2];
    }
  }
  return out;
}

Vec3 unit_normal(const Mat32& J) {
  const Vec3 c = J.col(0).cross(J.col(1));
  return c / c.norm();
}

}  // namespace

DerivativeErrors derivative_fd_errors(int example_id, int n_directions, unsigned seed) {
  const ExampleSpec spec = example_spec(example_id);
  Mesh m = build_initial_mesh(spec.domain, spec.dirichlet);
  m = red_refine(m).first;
  const BasisCache bc(m);
  const DktField psiA_h = dkt_interpolate(spec.chart, spec.chart_grad, m);
  const SurfaceCache sc = build_surface_cache(psiA_h, bc);
  const DofMap dm = make_dof_map(m);
  Load load;
  load.f = spec.load_f1;
  load.alpha = spec.alpha;

  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vec = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };

  // a generic field close to the interpolated chart
  const DktField psi = advance(psiA_h, dm, random_vec(dm.n_primal()), 0.02);

  const double t = 1e-6;
  DerivativeErrors err;

  const Eigen::VectorXd grad = energy_gradient(psi, bc, sc, load, dm);
  const SparseMat hess = energy_hessian(psi, bc, sc, load, dm);

  for (int k = 0; k < n_directions; ++k) {
    Eigen::VectorXd v = random_vec(dm.n_primal());
    v.normalize();
    Eigen::VectorXd w = random_vec(dm.n_primal());
    w.normalize();

    const double ep = total_energy(advance(psi, dm, v, t), bc, sc, load);
    const double em = total_energy(advance(psi, dm, v, -t), bc, sc, load);
    const double fd = (ep - em) / (2 * t);
    err.grad = std::max(err.grad, std::abs(grad.dot(v) - fd) / (1 + std::abs(fd)));

    const Eigen::VectorXd gp = energy_gradient(advance(psi, dm, w, t), bc, sc, load, dm);
    const Eigen::VectorXd gm = energy_gradient(advance(psi, dm, w, -t), bc, sc, load, dm);
    const double fd2 = ((gp - gm) / (2 * t)).dot(v);
    err.hess = std::max(err.hess, std::abs(v.dot(hess * w) - fd2) / (1 + std::abs(fd2)));

    // pointwise normal variations on a perturbed chart Jacobian
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    const Vec2 x(unif(rng), unif(rng));
    Mat32 J = spec.chart_grad(x);
    Mat32 Jv, Jw;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 2; ++c) {
        J(r, c) += 0.1 * gauss(rng);
        Jv(r, c) = gauss(rng);
        Jw(r, c) = gauss(rng);
      }
    }
    const Vec3 dn_fd = (unit_normal(J + t * Jv) - unit_normal(J - t * Jv)) / (2 * t);
    const Vec3 dn = normal_first_variation(J, Jv);
    err.normal_first = std::max(err.normal_first, (dn - dn_fd).norm() / (1 + dn_fd.norm()));

    const Vec3 d2n_fd = (normal_first_variation(J + t * Jw, Jv) -
                         normal_first_variation(J - t * Jw, Jv)) /
                        (2 * t);
    const Vec3 d2n = normal_second_variation(J, Jv, Jw);
    err.normal_second = std::max(err.normal_second, (d2n - d2n_fd).norm() / (1 + d2n_fd.norm()));
  }
  return err;
}

std::vector<CheckResult> run_property_suite(unsigned seed) {
  std::vector<CheckResult> out;

  {
    const double e = quadrature_exactness_error();
    std::ostringstream os;
    os << "max relative error " << e;
    out.push_back({"quadrature exact on degree <= 6", e <= 1e-14, os.str()});
  }
  {
    const double e = quadratic_reproduction_error();
    std::ostringstream os;
    os << "max error " << e;
    out.push_back({"discrete gradient reproduces quadratics", e <= 1e-12, os.str()});
  }
  for (int id = 1; id <= 5; ++id) {
    const DerivativeErrors e = derivative_fd_errors(id, 5, seed + id);
    std::ostringstream os;
    os << "grad " << e.grad << ", hess " << e.hess << ", normal " << e.normal_first << "/"
       << e.normal_second;
    const bool pass = e.grad <= 1e-6 && e.hess <= 1e-5 && e.normal_first <= 1e-6 &&
                      e.normal_second <= 1e-6;
    out.push_back({"variational consistency, example " + std::to_string(id), pass, os.str()});
  }
  return out;
}

}  // namespace isoshell
