#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "isoshell/geometry.hpp"
#include "isoshell/quadrature.hpp"

using namespace isoshell;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat32 cylinder_grad(const Vec2& x) {
  Mat32 g;
  g << std::cos(kPi * x[0]), 0, 0, 1, -std::sin(kPi * x[0]), 0;
  return g;
}

std::array<Mat2, 3> cylinder_hess(const Vec2& x) {
  std::array<Mat2, 3> H{Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
  H[0](0, 0) = -kPi * std::sin(kPi * x[0]);
  H[2](0, 0) = -kPi * std::cos(kPi * x[0]);
  return H;
}

Mat32 saddle_grad(const Vec2& x) {
  Mat32 g;
  g << 1, 0, 0, 1, x[0] - 0.5, -(x[1] - 0.5);
  return g;
}

std::array<Mat2, 3> saddle_hess(const Vec2&) {
  std::array<Mat2, 3> H{Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
  H[2] << 1, 0, 0, -1;
  return H;
}

}  // namespace

TEST_CASE("inv_sqrt_spd2 squares to the inverse") {
  std::mt19937 rng(42);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Mat2 B;
    B << g(rng), g(rng), g(rng), g(rng);
    const Mat2 spd = B * B.transpose() + 0.1 * Mat2::Identity();
    const Mat2 s = inv_sqrt_spd2(spd);
    CHECK((s - s.transpose()).norm() <= 1e-13);
    CHECK((s * s * spd - Mat2::Identity()).norm() <= 1e-12);
  }
}

TEST_CASE("cylinder forms: unit metric, outward normal, curvature zero") {
  for (double u : {0.1, 0.35, 0.62, 0.9}) {
    const Vec2 x(u, 0.4);
    const FirstSecondForms f = forms_from_jacobian_hessian(cylinder_grad(x), cylinder_hess(x));
    CHECK((f.g - Mat2::Identity()).norm() <= 1e-14);
    CHECK(f.sqrt_det_g == doctest::Approx(1.0).epsilon(1e-14));
    const Vec3 n_exact(std::sin(kPi * u), 0.0, std::cos(kPi * u));
    CHECK((f.n - n_exact).norm() <= 1e-14);
    // II = diag(-pi, 0) for this parametrization
    CHECK(f.II(0, 0) == doctest::Approx(-kPi).epsilon(1e-14));
    CHECK(std::abs(f.II(0, 1)) <= 1e-14);
    CHECK(std::abs(f.II(1, 1)) <= 1e-14);
    CHECK(std::abs(gauss_curvature(f.g, f.II)) <= 1e-13);
  }
}

TEST_CASE("saddle gauss curvature matches the closed form") {
  for (double u : {-0.4, -0.1, 0.2, 0.45}) {
    for (double v : {-0.3, 0.0, 0.25}) {
      const Vec2 x(u + 0.5, v + 0.5);
      const FirstSecondForms f = forms_from_jacobian_hessian(saddle_grad(x), saddle_hess(x));
      const double r2 = 1.0 + u * u + v * v;
      CHECK(f.sqrt_det_g == doctest::Approx(std::sqrt(r2)).epsilon(1e-13));
      CHECK(gauss_curvature(f.g, f.II) == doctest::Approx(-1.0 / (r2 * r2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("relative shape operator vanishes for identical forms") {
  const Vec2 x(0.3, 0.7);
  const FirstSecondForms f = forms_from_jacobian_hessian(saddle_grad(x), saddle_hess(x));
  CHECK(relative_shape_operator(f, f).norm() <= 1e-14);
}

TEST_CASE("surface cache weights integrate the surface area") {
  auto area_of = [](const std::function<Vec3(const Vec2&)>& chart,
                    const std::function<Mat32(const Vec2&)>& grad) {
    Mesh m = build_initial_mesh(Domain::unit_square, {});
    for (int l = 0; l < 3; ++l) m = red_refine(m).first;
    const BasisCache bc(m);
    const SurfaceCache sc = build_surface_cache(dkt_interpolate(chart, grad, m), bc);
    double area = 0.0;
    for (const auto& tri : sc.tri) {
      for (const auto& q : tri) {
        area += q.weight;
        CHECK((q.cross_tensor - q.g_inv * q.II * q.g_inv).norm() <= 1e-12);
        CHECK(q.n.norm() == doctest::Approx(1.0).epsilon(1e-13));
      }
    }
    return area;
  };

  const double plate = area_of([](const Vec2& x) { return Vec3(x[0], x[1], 0); },
                               [](const Vec2&) {
                                 Mat32 g;
                                 g << 1, 0, 0, 1, 0, 0;
                                 return g;
                               });
  CHECK(plate == doctest::Approx(1.0).epsilon(1e-13));

  const double cylinder = area_of(
      [](const Vec2& x) {
        return Vec3(std::sin(kPi * x[0]) / kPi, x[1], std::cos(kPi * x[0]) / kPi);
      },
      cylinder_grad);
  // unit-speed parametrization of the half cylinder: area 1 up to
  // interpolation error of the non-polynomial chart
  CHECK(cylinder == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("degenerate jacobian guard") {
  Mat32 J = Mat32::Zero();
  J.col(0) = Vec3(1, 0, 0);
  J.col(1) = Vec3(2, 0, 0);  // parallel columns
  const std::array<Mat2, 3> H{Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
  CHECK_THROWS(forms_from_jacobian_hessian(J, H));
}
