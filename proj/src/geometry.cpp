#include "isoshell/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace isoshell {

Mat2 inv_sqrt_spd2(const Mat2& g) {
  if (std::abs(g(0, 1) - g(1, 0)) > 1e-12 * (1.0 + g.norm()))
    throw std::invalid_argument("inv_sqrt_spd2: matrix not symmetric");
  const double det = g.determinant();
  if (det <= 1e-14 || g(0, 0) <= 0.0) throw std::invalid_argument("inv_sqrt_spd2: matrix not SPD");
  // sqrt(g) = (g + sqrt(det g) I) / sqrt(tr g + 2 sqrt(det g)); invert via the adjugate
  const double sd = std::sqrt(det);
  const double denom = std::sqrt(g.trace() + 2.0 * sd);
  Mat2 sq = (g + sd * Mat2::Identity()) / denom;
  Mat2 inv;
  inv << sq(1, 1), -sq(0, 1), -sq(1, 0), sq(0, 0);
  return inv / sq.determinant();
}

FirstSecondForms forms_from_jacobian_hessian(const Mat32& J, const std::array<Mat2, 3>& H) {
  FirstSecondForms f;
  f.J = J;
  const Vec3 cross = J.col(0).cross(J.col(1));
  const double len = cross.norm();
  if (len <= kDegenerateJacobianTol) throw std::runtime_error("degenerate parametrization");
  f.n = cross / len;
  f.g = J.transpose() * J;
  f.g_inv = f.g.inverse();
  f.g_inv_sqrt = inv_sqrt_spd2(f.g);
  f.sqrt_det_g = std::sqrt(f.g.determinant());
  f.II = f.n[0] * H[0] + f.n[1] * H[1] + f.n[2] * H[2];
  return f;
}

double gauss_curvature(const Mat2& g, const Mat2& II) {
  const double det = g.determinant();
  if (std::abs(det) <= 1e-14) throw std::invalid_argument("gauss_curvature: singular metric");
  return (g.inverse() * II).determinant();
}

Mat2 relative_shape_operator(const FirstSecondForms& a, const FirstSecondForms& b) {
  return a.g_inv * (a.II - b.II);
}

SurfaceCache build_surface_cache(const DktField& psiA_h, const BasisCache& bc) {
  const Mesh& m = bc.mesh();
  if (psiA_h.mesh() != &m) throw std::invalid_argument("surface cache mesh mismatch");
  const QuadRule& rule = rule_degree6();

  SurfaceCache cache;
  cache.mesh = &m;
  cache.tri.resize(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const ElementBasis& basis = bc[t];
    const auto& tab = basis.tables();
    std::array<Vec9, 3> dofs;
    for (int c = 0; c < 3; ++c) dofs[c] = local_dofs(psiA_h.comp[c], m, t);
    const double area2 = 2.0 * m.signed_area(t);
    const auto& tri = m.triangles[t];

    for (int q = 0; q < QuadRule::n; ++q) {
      Mat32 J;
      std::array<Mat2, 3> H;
      for (int c = 0; c < 3; ++c) {
        J.row(c) = (tab.grad[q] * dofs[c]).transpose();
        H[c].setZero();
        for (int j = 0; j < 9; ++j) H[c] += dofs[c][j] * tab.grad_theta[q][j];
      }
      const FirstSecondForms f = forms_from_jacobian_hessian(J, H);
      SurfaceCache::Point& p = cache.tri[t][q];
      p.g = f.g;
      p.g_inv = f.g_inv;
      p.g_inv_sqrt = f.g_inv_sqrt;
      p.II = f.II;
      p.cross_tensor = f.g_inv * f.II * f.g_inv;
      p.n = f.n;
      p.sqrt_det_g = f.sqrt_det_g;
      p.weight = rule.weight[q] * area2;
      p.x = rule.bary[q][0] * m.vertices[tri[0]] + rule.bary[q][1] * m.vertices[tri[1]] +
            rule.bary[q][2] * m.vertices[tri[2]];
    }
  }
  return cache;
}

}  // namespace isoshell
