#include "isoshell/dkt.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace isoshell {

namespace {

using Vec10 = Eigen::Matrix<double, 10, 1>;

// monomial order: 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3
Vec10 mono_val(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vec10 m;
  m << 1, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y;
  return m;
}

Vec10 mono_dx(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vec10 m;
  m << 0, 1, 0, 2 * x, y, 0, 3 * x * x, 2 * x * y, y * y, 0;
  return m;
}

Vec10 mono_dy(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vec10 m;
  m << 0, 0, 1, 0, x, 2 * y, 0, x * x, 2 * x * y, 3 * y * y;
  return m;
}

Vec10 mono_dxx(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vec10 m;
  m << 0, 0, 0, 2, 0, 0, 6 * x, 2 * y, 0, 0;
  return m;
}

Vec10 mono_dxy(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vec10 m;
  m << 0, 0, 0, 0, 1, 0, 0, 2 * x, 2 * y, 0;
  return m;
}

Vec10 mono_dyy(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vec10 m;
  m << 0, 0, 0, 0, 0, 2, 0, 0, 2 * x, 6 * y;
  return m;
}

// P2 nodes: vertices 0..2, then midpoints of edges (0,1), (1,2), (2,0).
const std::array<Vec3, 6> kP2Nodes = {Vec3(1, 0, 0),       Vec3(0, 1, 0),
                                      Vec3(0, 0, 1),       Vec3(0.5, 0.5, 0),
                                      Vec3(0, 0.5, 0.5),   Vec3(0.5, 0, 0.5)};

Eigen::Matrix<double, 6, 1> p2_values(const Vec3& l) {
  Eigen::Matrix<double, 6, 1> phi;
  phi[0] = l[0] * (2 * l[0] - 1);
  phi[1] = l[1] * (2 * l[1] - 1);
  phi[2] = l[2] * (2 * l[2] - 1);
  phi[3] = 4 * l[0] * l[1];
  phi[4] = 4 * l[1] * l[2];
  phi[5] = 4 * l[2] * l[0];
  return phi;
}

// physical gradients, given grad_lambda (3x2)
std::array<Vec2, 6> p2_gradients(const Vec3& l, const Eigen::Matrix<double, 3, 2>& gl) {
  std::array<Vec2, 6> g;
  for (int i = 0; i < 3; ++i) g[i] = (4 * l[i] - 1) * gl.row(i).transpose();
  g[3] = 4 * (l[0] * gl.row(1).transpose() + l[1] * gl.row(0).transpose());
  g[4] = 4 * (l[1] * gl.row(2).transpose() + l[2] * gl.row(1).transpose());
  g[5] = 4 * (l[2] * gl.row(0).transpose() + l[0] * gl.row(2).transpose());
  return g;
}

}  // namespace

ElementBasis::ElementBasis(const Vec2& e1, const Vec2& e2) {
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  if (det <= 1e-14) throw std::invalid_argument("degenerate or misoriented triangle");

  const std::array<Vec2, 3> p = {Vec2::Zero().eval(), e1, e2};
  const Vec2 centroid = (p[0] + p[1] + p[2]) / 3.0;
  scale_ = std::max({e1.norm(), e2.norm(), (e2 - e1).norm()});
  for (int i = 0; i < 3; ++i) xi_[i] = (p[i] - centroid) / scale_;

  // barycentric gradients: rows of the inverse edge matrix
  Mat2 B;
  B.col(0) = e1;
  B.col(1) = e2;
  const Mat2 Binv = B.inverse();
  grad_lambda_.row(1) = Binv.row(0);
  grad_lambda_.row(2) = Binv.row(1);
  grad_lambda_.row(0) = -Binv.row(0) - Binv.row(1);

  // nodal basis of P_{3,red}: 9 interpolation rows plus the center-of-mass row
  Eigen::Matrix<double, 10, 10> A;
  for (int i = 0; i < 3; ++i) {
    A.row(3 * i) = mono_val(xi_[i]).transpose();
    A.row(3 * i + 1) = mono_dx(xi_[i]).transpose() / scale_;
    A.row(3 * i + 2) = mono_dy(xi_[i]).transpose() / scale_;
  }
  Vec10 c = 6.0 * mono_val(Vec2::Zero());
  for (int i = 0; i < 3; ++i) {
    c -= 2.0 * mono_val(xi_[i]);
    c += mono_dx(xi_[i]) * xi_[i].x() + mono_dy(xi_[i]) * xi_[i].y();
  }
  A.row(9) = c.transpose();

  Eigen::Matrix<double, 10, 9> rhs = Eigen::Matrix<double, 10, 9>::Zero();
  rhs.topLeftCorner<9, 9>().setIdentity();
  coeff_ = A.fullPivLu().solve(rhs);

  // theta node values: vertices carry the gradient dofs
  for (int n = 0; n < 6; ++n) theta_node_[n].setZero();
  for (int i = 0; i < 3; ++i) {
    theta_node_[i](0, 3 * i + 1) = 1.0;
    theta_node_[i](1, 3 * i + 2) = 1.0;
  }
  // edge midpoints: tangential part from the cubic, normal part affine
  const std::array<std::array<int, 2>, 3> ev = {{{0, 1}, {1, 2}, {2, 0}}};
  for (int k = 0; k < 3; ++k) {
    const int a = ev[k][0], b = ev[k][1];
    const Vec2 t = (p[b] - p[a]).normalized();
    const Vec2 n(-t.y(), t.x());
    Vec3 mid = Vec3::Zero();
    mid[a] = 0.5;
    mid[b] = 0.5;
    const Eigen::Matrix<double, 2, 9> gmid = basis_gradients(mid);
    const Eigen::Matrix<double, 1, 9> tang = t.transpose() * gmid;
    Eigen::Matrix<double, 1, 9> norm = Eigen::Matrix<double, 1, 9>::Zero();
    for (int v : {a, b}) {
      norm(0, 3 * v + 1) += 0.5 * n.x();
      norm(0, 3 * v + 2) += 0.5 * n.y();
    }
    theta_node_[3 + k] = t * tang + n * norm;
  }

  // tabulate at the quadrature points
  const QuadRule& rule = rule_degree6();
  for (int q = 0; q < QuadRule::n; ++q) {
    const Vec3& l = rule.bary[q];
    tables_.val[q] = basis_values(l);
    tables_.grad[q] = basis_gradients(l);

    const auto phi = p2_values(l);
    const auto gphi = p2_gradients(l, grad_lambda_);
    Eigen::Matrix<double, 2, 9> th = Eigen::Matrix<double, 2, 9>::Zero();
    for (int n = 0; n < 6; ++n) th += phi[n] * theta_node_[n];
    tables_.theta[q] = th;

    const Vec2 loc = to_local(l);
    const Vec10 dxx = mono_dxx(loc), dxy = mono_dxy(loc), dyy = mono_dyy(loc);
    const double s2 = scale_ * scale_;
    for (int j = 0; j < 9; ++j) {
      Mat2 gt = Mat2::Zero();
      for (int n = 0; n < 6; ++n) gt += theta_node_[n].col(j) * gphi[n].transpose();
      tables_.grad_theta[q][j] = gt;

      Mat2 h;
      h(0, 0) = dxx.dot(coeff_.col(j)) / s2;
      h(0, 1) = h(1, 0) = dxy.dot(coeff_.col(j)) / s2;
      h(1, 1) = dyy.dot(coeff_.col(j)) / s2;
      tables_.hess[q][j] = h;
    }
  }
}

Vec2 ElementBasis::to_local(const Vec3& bary) const {
  return bary[0] * xi_[0] + bary[1] * xi_[1] + bary[2] * xi_[2];
}

Eigen::Matrix<double, 1, 9> ElementBasis::basis_values(const Vec3& bary) const {
  return mono_val(to_local(bary)).transpose() * coeff_;
}

Eigen::Matrix<double, 2, 9> ElementBasis::basis_gradients(const Vec3& bary) const {
  const Vec2 loc = to_local(bary);
  Eigen::Matrix<double, 2, 9> g;
  g.row(0) = mono_dx(loc).transpose() * coeff_ / scale_;
  g.row(1) = mono_dy(loc).transpose() * coeff_ / scale_;
  return g;
}

double ElementBasis::eval(const Vec9& dofs, const Vec3& bary) const {
  return basis_values(bary) * dofs;
}

Vec2 ElementBasis::eval_grad(const Vec9& dofs, const Vec3& bary) const {
  return basis_gradients(bary) * dofs;
}

Mat2 ElementBasis::eval_hess(const Vec9& dofs, const Vec3& bary) const {
  const Vec2 loc = to_local(bary);
  const Vec10 c = coeff_ * dofs;
  const double s2 = scale_ * scale_;
  Mat2 h;
  h(0, 0) = mono_dxx(loc).dot(c) / s2;
  h(0, 1) = h(1, 0) = mono_dxy(loc).dot(c) / s2;
  h(1, 1) = mono_dyy(loc).dot(c) / s2;
  return h;
}

Vec2 ElementBasis::theta(const Vec9& dofs, const Vec3& bary) const {
  const auto phi = p2_values(bary);
  Vec2 th = Vec2::Zero();
  for (int n = 0; n < 6; ++n) th += phi[n] * (theta_node_[n] * dofs);
  return th;
}

Mat2 ElementBasis::grad_theta(const Vec9& dofs, const Vec3& bary) const {
  const auto gphi = p2_gradients(bary, grad_lambda_);
  Mat2 gt = Mat2::Zero();
  for (int n = 0; n < 6; ++n) gt += (theta_node_[n] * dofs) * gphi[n].transpose();
  return gt;
}

namespace {

struct ShapeKey {
  std::array<std::uint64_t, 4> bits;
  bool operator==(const ShapeKey&) const = default;
};

struct ShapeKeyHash {
  std::size_t operator()(const ShapeKey& k) const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint64_t b : k.bits) h = (h ^ b) * 0x100000001b3ull;
    return h;
  }
};

ShapeKey make_key(const Vec2& e1, const Vec2& e2) {
  return ShapeKey{{std::bit_cast<std::uint64_t>(e1.x()), std::bit_cast<std::uint64_t>(e1.y()),
                   std::bit_cast<std::uint64_t>(e2.x()), std::bit_cast<std::uint64_t>(e2.y())}};
}

}  // namespace

BasisCache::BasisCache(const Mesh& m) : mesh_(&m) {
  std::unordered_map<ShapeKey, const ElementBasis*, ShapeKeyHash> seen;
  per_tri_.reserve(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const Vec2 e1 = m.vertices[tri[1]] - m.vertices[tri[0]];
    const Vec2 e2 = m.vertices[tri[2]] - m.vertices[tri[0]];
    const ShapeKey key = make_key(e1, e2);
    auto it = seen.find(key);
    if (it == seen.end()) {
      storage_.emplace_back(e1, e2);
      it = seen.emplace(key, &storage_.back()).first;
    }
    per_tri_.push_back(it->second);
  }
}

DktScalarField DktScalarField::zero(const Mesh& m) {
  DktScalarField f;
  f.mesh = &m;
  f.value = Eigen::VectorXd::Zero(m.num_vertices());
  f.grad = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(m.num_vertices(), 2);
  return f;
}

DktField DktField::zero(const Mesh& m) {
  DktField f;
  for (auto& c : f.comp) c = DktScalarField::zero(m);
  return f;
}

Vec3 DktField::value_at(int v) const {
  return Vec3(comp[0].value[v], comp[1].value[v], comp[2].value[v]);
}

Mat32 DktField::grad_at(int v) const {
  Mat32 g;
  for (int m = 0; m < 3; ++m) g.row(m) = comp[m].grad.row(v);
  return g;
}

Vec9 local_dofs(const DktScalarField& f, const Mesh& m, int t) {
  Vec9 d;
  for (int i = 0; i < 3; ++i) {
    const int v = m.triangles[t][i];
    d[3 * i] = f.value[v];
    d[3 * i + 1] = f.grad(v, 0);
    d[3 * i + 2] = f.grad(v, 1);
  }
  return d;
}

DktScalarField dkt_interpolate(const std::function<double(const Vec2&)>& w,
                               const std::function<Vec2(const Vec2&)>& grad_w,
                               const Mesh& m) {
  DktScalarField f = DktScalarField::zero(m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    f.value[v] = w(m.vertices[v]);
    f.grad.row(v) = grad_w(m.vertices[v]).transpose();
  }
  return f;
}

DktField dkt_interpolate(const std::function<Vec3(const Vec2&)>& psi,
                         const std::function<Mat32(const Vec2&)>& grad_psi,
                         const Mesh& m) {
  DktField f = DktField::zero(m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec3 val = psi(m.vertices[v]);
    const Mat32 g = grad_psi(m.vertices[v]);
    for (int c = 0; c < 3; ++c) {
      f.comp[c].value[v] = val[c];
      f.comp[c].grad.row(v) = g.row(c);
    }
  }
  return f;
}

double eval(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary) {
  return bc[t].eval(local_dofs(f, bc.mesh(), t), bary);
}

Vec2 eval_grad(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary) {
  return bc[t].eval_grad(local_dofs(f, bc.mesh(), t), bary);
}

Vec2 theta(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary) {
  return bc[t].theta(local_dofs(f, bc.mesh(), t), bary);
}

Mat2 grad_theta(const DktScalarField& f, const BasisCache& bc, int t, const Vec3& bary) {
  return bc[t].grad_theta(local_dofs(f, bc.mesh(), t), bary);
}

Vec3 eval(const DktField& f, const BasisCache& bc, int t, const Vec3& bary) {
  Vec3 v;
  for (int c = 0; c < 3; ++c) v[c] = eval(f.comp[c], bc, t, bary);
  return v;
}

Mat32 eval_grad(const DktField& f, const BasisCache& bc, int t, const Vec3& bary) {
  Mat32 g;
  for (int c = 0; c < 3; ++c) g.row(c) = eval_grad(f.comp[c], bc, t, bary).transpose();
  return g;
}

std::array<Mat2, 3> grad_theta(const DktField& f, const BasisCache& bc, int t, const Vec3& bary) {
  std::array<Mat2, 3> h;
  for (int c = 0; c < 3; ++c) h[c] = grad_theta(f.comp[c], bc, t, bary);
  return h;
}

double P1Field::eval(int t, const Vec3& bary) const {
  const auto& tri = mesh->triangles[t];
  return bary[0] * nodal[tri[0]] + bary[1] * nodal[tri[1]] + bary[2] * nodal[tri[2]];
}

P1Field p1_interpolate_nodal(const Eigen::VectorXd& values, const Mesh& m) {
  if (values.size() != m.num_vertices()) throw std::invalid_argument("nodal data size mismatch");
  return P1Field{&m, values};
}

DktScalarField prolongate(const DktScalarField& f, const ProlongationMap& p,
                          const BasisCache& coarse_bc, const Mesh& fine) {
  const Mesh& coarse = coarse_bc.mesh();
  if (f.mesh != &coarse || p.n_coarse_vertices != coarse.num_vertices() ||
      static_cast<int>(p.from_vertex.size()) != fine.num_vertices()) {
    throw std::invalid_argument("prolongation mesh/map mismatch");
  }
  DktScalarField g = DktScalarField::zero(fine);
  for (int v = 0; v < fine.num_vertices(); ++v) {
    if (p.from_vertex[v] >= 0) {
      const int cv = p.from_vertex[v];
      g.value[v] = f.value[cv];
      g.grad.row(v) = f.grad.row(cv);
    } else {
      const Edge& e = coarse.edges[p.from_edge[v]];
      const int t = e.tri[0];
      Vec3 bary = Vec3::Zero();
      for (int i = 0; i < 3; ++i) {
        if (coarse.triangles[t][i] == e.a || coarse.triangles[t][i] == e.b) bary[i] = 0.5;
      }
      const Vec9 dofs = local_dofs(f, coarse, t);
      g.value[v] = coarse_bc[t].eval(dofs, bary);
      g.grad.row(v) = coarse_bc[t].theta(dofs, bary).transpose();
    }
  }
  return g;
}

DktField prolongate(const DktField& f, const ProlongationMap& p,
                    const BasisCache& coarse_bc, const Mesh& fine) {
  DktField g;
  for (int c = 0; c < 3; ++c) g.comp[c] = prolongate(f.comp[c], p, coarse_bc, fine);
  return g;
}

}  // namespace isoshell
