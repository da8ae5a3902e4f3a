#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>

#include "isoshell/mesh.hpp"

namespace isoshell {

/// Symmetric 12-point triangle rule, exact on polynomials of total degree 6.
/// Weights refer to the reference triangle and sum to 1/2.
struct QuadRule {
  static constexpr int n = 12;
  std::array<Vec3, n> bary;      // barycentric coordinates (l0,l1,l2)
  std::array<double, n> weight;
};

const QuadRule& rule_degree6();

/// Integrates f over the physical triangle (a,b,c) with the degree-6 rule.
double integrate(const Vec2& a, const Vec2& b, const Vec2& c,
                 const std::function<double(const Vec2&)>& f);

/// Integrates f over triangle t of the mesh.
double integrate(const Mesh& m, int t, const std::function<double(const Vec2&)>& f);

}  // namespace isoshell
