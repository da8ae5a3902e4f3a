#pragma once

#include <array>
#include <deque>
#include <functional>
#include <unordered_map>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "isoshell/mesh.hpp"
#include "isoshell/quadrature.hpp"

namespace isoshell {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

/// Local machinery of the reduced-cubic DKT element on one triangle shape.
///
/// The nine local degrees of freedom are ordered (value, d/dx, d/dy) per
/// vertex. The represented polynomial is the unique element of P_{3,red}
/// matching them; theta is the quadratic discrete gradient determined by
/// the nodal gradients, the midpoint tangential derivative of the cubic,
/// and an affine normal component along each edge.
class ElementBasis {
 public:
  ElementBasis(const Vec2& e1, const Vec2& e2);

  // value / gradient / second derivative of the reduced cubic
  double eval(const Vec9& dofs, const Vec3& bary) const;
  Vec2 eval_grad(const Vec9& dofs, const Vec3& bary) const;
  Mat2 eval_hess(const Vec9& dofs, const Vec3& bary) const;

  // discrete gradient operator and its derivative
  Vec2 theta(const Vec9& dofs, const Vec3& bary) const;
  Mat2 grad_theta(const Vec9& dofs, const Vec3& bary) const;

  // tables at the points of the degree-6 rule
  struct QuadTables {
    std::array<Eigen::Matrix<double, 1, 9>, QuadRule::n> val;
    std::array<Eigen::Matrix<double, 2, 9>, QuadRule::n> grad;
    std::array<Eigen::Matrix<double, 2, 9>, QuadRule::n> theta;
    std::array<std::array<Mat2, 9>, QuadRule::n> grad_theta;  // per dof
    std::array<std::array<Mat2, 9>, QuadRule::n> hess;        // per dof
  };
  const QuadTables& tables() const { return tables_; }

  Eigen::Matrix<double, 1, 9> basis_values(const Vec3& bary) const;
  Eigen::Matrix<double, 2, 9> basis_gradients(const Vec3& bary) const;

 private:
  Vec2 to_local(const Vec3& bary) const;

  double scale_;
  std::array<Vec2, 3> xi_;                    // vertex positions in scaled local coords
  Eigen::Matrix<double, 10, 9> coeff_;        // monomial coefficients per local dof
  Eigen::Matrix<double, 3, 2> grad_lambda_;   // physical barycentric gradients
  std::array<Eigen::Matrix<double, 2, 9>, 6> theta_node_;  // P2 node values of theta
  QuadTables tables_;
};

/// Per-mesh store of element bases, deduplicated by triangle shape
/// (all coordinates are dyadic, so bitwise keying is exact).
class BasisCache {
 public:
  explicit BasisCache(const Mesh& m);

  const ElementBasis& operator[](int t) const { return *per_tri_[t]; }
  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  std::deque<ElementBasis> storage_;
  std::vector<const ElementBasis*> per_tri_;
};

/// Scalar DKT field: one value and one gradient per mesh vertex.
struct DktScalarField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd value;
  Eigen::Matrix<double, Eigen::Dynamic, 2> grad;

  static DktScalarField zero(const Mesh& m);
};

/// Vector-valued field in W_h^3; all components share one mesh.
struct DktField {
  std::array<DktScalarField, 3> comp;

  const Mesh* mesh() const { return comp[0].mesh; }
  static DktField zero(const Mesh& m);
  Vec3 value_at(int v) const;
  Mat32 grad_at(int v) const;  // nodal Jacobian
};

Vec9 local_dofs(const DktScalarField& f, const Mesh& m, int t);

DktScalarField dkt_interpolate(const std::function<double(const Vec2&)>& w,
                               const std::function<Vec2(const Vec2&)>& grad_w,
                               const Mesh& m);

DktField dkt_interpolate(const std::function<Vec3(const Vec2&)>& psi,
                         const std::function<Mat32(const Vec2&)>& grad_psi,
                         const Mesh& m);

double eval(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary);
Vec2 eval_grad(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary);
Vec2 theta(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary);
Mat2 grad_theta(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary);

Vec3 eval(const DktField& f, const BasisCache& bc, int t, const Vec3& bary);
Mat32 eval_grad(const DktField& f, const BasisCache& bc, int t, const Vec3& bary);
/// Discrete Hessian surrogate per component.
std::array<Mat2, 3> grad_theta(const DktField& f, const BasisCache& bc, int t, const Vec3& bary);

/// Piecewise-affine nodal interpolation (the operator I_h).
struct P1Field {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd nodal;

  double eval(int t, const Vec3& bary) const;
};

P1Field p1_interpolate_nodal(const Eigen::VectorXd& values, const Mesh& m);

DktScalarField prolongate(const DktScalarField& f, const ProlongationMap& p,
                          const BasisCache& coarse_bc, const Mesh& fine);
DktField prolongate(const DktField& f, const ProlongationMap& p,
                    const BasisCache& coarse_bc, const Mesh& fine);

}  // namespace isoshell
