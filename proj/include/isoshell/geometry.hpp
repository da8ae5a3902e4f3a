#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "isoshell/dkt.hpp"

namespace isoshell {

/// Degeneracy threshold on |d1psi x d2psi|, shared by all modules.
inline constexpr double kDegenerateJacobianTol = 1e-14;

/// Pointwise first and second fundamental forms of a parametrized surface.
struct FirstSecondForms {
  Mat32 J = Mat32::Zero();  // rows are components, columns are d1, d2
  Mat2 g = Mat2::Zero();
  Mat2 g_inv = Mat2::Zero();
  Mat2 g_inv_sqrt = Mat2::Zero();
  Vec3 n = Vec3::Zero();
  Mat2 II = Mat2::Zero();
  double sqrt_det_g = 0.0;
};

/// Closed-form inverse square root of a 2x2 SPD matrix.
Mat2 inv_sqrt_spd2(const Mat2& g);

/// Assembles all forms from the Jacobian and a (discrete) Hessian,
/// with II = sum_l n_l H_l.
FirstSecondForms forms_from_jacobian_hessian(const Mat32& J, const std::array<Mat2, 3>& H);

double gauss_curvature(const Mat2& g, const Mat2& II);

/// g_A^{-1} (II_A - II_B); diagnostic quantity.
Mat2 relative_shape_operator(const FirstSecondForms& a, const FirstSecondForms& b);

/// Reference-surface data of psi_{A,h} at every quadrature point.
struct SurfaceCache {
  struct Point {
    Mat2 g, g_inv, g_inv_sqrt, II;
    Mat2 cross_tensor;  // g^{-1} II g^{-1}
    Vec3 n;
    double sqrt_det_g = 0.0;
    double weight = 0.0;  // quadrature weight including the area factor
    Vec2 x;               // physical position
  };
  const Mesh* mesh = nullptr;
  std::vector<std::array<Point, QuadRule::n>> tri;
};

SurfaceCache build_surface_cache(const DktField& psiA_h, const BasisCache& bc);

}  // namespace isoshell
