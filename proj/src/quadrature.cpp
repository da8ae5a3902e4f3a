#include "isoshell/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace isoshell {

namespace {

QuadRule make_rule() {
  // Two 3-point orbits (a,b,b) and one 6-point orbit (a,b,c).
  const double a1 = 0.8738219710169955433193;
  const double w1 = 0.02542245318510340846047;
  const double a2 = 0.5014265096581791574167;
  const double w2 = 0.05839313786318968301264;
  const double a3 = 0.6365024991213986472301;
  const double b3 = 0.3103524510337844054166;
  const double w3 = 0.04142553780918678759678;

  QuadRule r;
  int k = 0;
  auto push = [&](double l0, double l1, double l2, double w) {
    r.bary[k] = Vec3(l0, l1, l2);
    r.weight[k] = w;
    ++k;
  };
  auto orbit3 = [&](double a, double w) {
    const double b = 0.5 * (1.0 - a);
    push(a, b, b, w);
    push(b, a, b, w);
    push(b, b, a, w);
  };
  auto orbit6 = [&](double a, double b, double w) {
    const double c = 1.0 - a - b;
    push(a, b, c, w);
    push(a, c, b, w);
    push(b, a, c, w);
    push(b, c, a, w);
    push(c, a, b, w);
    push(c, b, a, w);
  };
  orbit3(a1, w1);
  orbit3(a2, w2);
  orbit6(a3, b3, w3);
  return r;
}

}  // namespace

const QuadRule& rule_degree6() {
  static const QuadRule rule = make_rule();
  return rule;
}

double integrate(const Vec2& a, const Vec2& b, const Vec2& c,
                 const std::function<double(const Vec2&)>& f) {
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  if (std::abs(det) < 1e-14) throw std::invalid_argument("degenerate triangle");
  const QuadRule& r = rule_degree6();
  double s = 0.0;
  for (int q = 0; q < QuadRule::n; ++q) {
    const Vec2 x = r.bary[q][0] * a + r.bary[q][1] * b + r.bary[q][2] * c;
    s += r.weight[q] * f(x);
  }
  return s * std::abs(det);
}

double integrate(const Mesh& m, int t, const std::function<double(const Vec2&)>& f) {
  const auto& tri = m.triangles[t];
  return integrate(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]], f);
}

}  // namespace isoshell
