#include "isoshell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace isoshell {

double Mesh::signed_area(int t) const {
  const Vec2& a = vertices[triangles[t][0]];
  const Vec2& b = vertices[triangles[t][1]];
  const Vec2& c = vertices[triangles[t][2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double Mesh::longest_edge(int t) const {
  double l = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = vertices[triangles[t][i]];
    const Vec2& b = vertices[triangles[t][(i + 1) % 3]];
    l = std::max(l, (b - a).norm());
  }
  return l;
}

bool point_on_segment(const Vec2& x, const Segment& s, double tol) {
  const Vec2 d = s.q - s.p;
  const Vec2 r = x - s.p;
  const double len = d.norm();
  if (len <= tol) return r.norm() <= tol;
  const double cross = d.x() * r.y() - d.y() * r.x();
  if (std::abs(cross) / len > tol) return false;
  const double t = d.dot(r) / (len * len);
  return t >= -tol && t <= 1.0 + tol;
}

namespace {

void build_edges(Mesh& m) {
  std::map<std::pair<int, int>, int> edge_index;
  m.edges.clear();
  m.tri_edges.assign(m.triangles.size(), {-1, -1, -1});
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      int a = m.triangles[t][i];
      int b = m.triangles[t][(i + 1) % 3];
      std::pair<int, int> key = std::minmax(a, b);
      auto it = edge_index.find(key);
      int e;
      if (it == edge_index.end()) {
        e = static_cast<int>(m.edges.size());
        edge_index.emplace(key, e);
        Edge edge;
        edge.a = key.first;
        edge.b = key.second;
        edge.midpoint = 0.5 * (m.vertices[edge.a] + m.vertices[edge.b]);
        edge.tangent = (m.vertices[edge.b] - m.vertices[edge.a]).normalized();
        m.edges.push_back(edge);
      } else {
        e = it->second;
      }
      Edge& edge = m.edges[e];
      if (edge.tri[0] == -1) {
        edge.tri[0] = t;
      } else if (edge.tri[1] == -1) {
        edge.tri[1] = t;
      } else {
        throw std::runtime_error("edge shared by more than two triangles");
      }
      m.tri_edges[t][i] = e;
    }
  }
}

void mark_dirichlet(Mesh& m) {
  m.is_dirichlet.assign(m.vertices.size(), 0);
  m.dirichlet_nodes.clear();
  for (int v = 0; v < m.num_vertices(); ++v) {
    for (const Segment& s : m.dirichlet_segments) {
      if (point_on_segment(m.vertices[v], s)) {
        m.is_dirichlet[v] = 1;
        m.dirichlet_nodes.push_back(v);
        break;
      }
    }
  }
}

void finalize(Mesh& m) {
  build_edges(m);
  mark_dirichlet(m);
  m.h = mesh_diameter(m);
  for (int t = 0; t < m.num_triangles(); ++t) {
    if (m.signed_area(t) <= 0.0) throw std::runtime_error("triangle with nonpositive area");
  }
}

// Splits the rectangular cell with corners c00,c10,c11,c01 along the
// lower-left to upper-right diagonal.
void add_cell(Mesh& m, int c00, int c10, int c11, int c01) {
  m.triangles.push_back({c00, c10, c11});
  m.triangles.push_back({c00, c11, c01});
}

std::vector<Segment> boundary_polygon(Domain domain) {
  std::vector<Vec2> poly;
  if (domain == Domain::unit_square) {
    poly = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  } else {
    poly = {{0, 0}, {0.5, 0}, {0.5, 0.5}, {1, 0.5}, {1, 1}, {0, 1}};
  }
  std::vector<Segment> segs;
  for (size_t i = 0; i < poly.size(); ++i) {
    segs.push_back({poly[i], poly[(i + 1) % poly.size()]});
  }
  return segs;
}

}  // namespace

Mesh build_initial_mesh(Domain domain, const std::vector<Segment>& dirichlet_spec) {
  Mesh m;
  m.level = 0;
  if (domain == Domain::unit_square) {
    m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    add_cell(m, 0, 1, 2, 3);
  } else if (domain == Domain::l_shape) {
    m.vertices = {{0, 0}, {0.5, 0},                      // 0 1
                  {0, 0.5}, {0.5, 0.5}, {1, 0.5},        // 2 3 4
                  {0, 1},   {0.5, 1},   {1, 1}};         // 5 6 7
    add_cell(m, 0, 1, 3, 2);
    add_cell(m, 2, 3, 6, 5);
    add_cell(m, 3, 4, 7, 6);
  } else {
    throw std::invalid_argument("unknown domain tag");
  }

  const std::vector<Segment> boundary = boundary_polygon(domain);
  for (const Segment& s : dirichlet_spec) {
    bool contained = false;
    for (const Segment& b : boundary) {
      if (point_on_segment(s.p, b) && point_on_segment(s.q, b)) {
        contained = true;
        break;
      }
    }
    if (!contained) throw std::invalid_argument("dirichlet segment not on the domain boundary");
  }
  m.dirichlet_segments = dirichlet_spec;
  finalize(m);
  return m;
}

std::pair<Mesh, ProlongationMap> red_refine(const Mesh& m) {
  Mesh f;
  f.level = m.level + 1;
  f.dirichlet_segments = m.dirichlet_segments;
  f.vertices = m.vertices;

  ProlongationMap map;
  map.n_coarse_vertices = m.num_vertices();
  for (int v = 0; v < m.num_vertices(); ++v) {
    map.from_vertex.push_back(v);
    map.from_edge.push_back(-1);
  }
  std::vector<int> edge_mid(m.edges.size());
  for (size_t e = 0; e < m.edges.size(); ++e) {
    edge_mid[e] = static_cast<int>(f.vertices.size());
    f.vertices.push_back(m.edges[e].midpoint);
    map.from_vertex.push_back(-1);
    map.from_edge.push_back(static_cast<int>(e));
  }

  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const int m01 = edge_mid[m.tri_edges[t][0]];
    const int m12 = edge_mid[m.tri_edges[t][1]];
    const int m20 = edge_mid[m.tri_edges[t][2]];
    f.triangles.push_back({tri[0], m01, m20});
    f.triangles.push_back({m01, tri[1], m12});
    f.triangles.push_back({m20, m12, tri[2]});
    f.triangles.push_back({m01, m12, m20});
  }
  finalize(f);
  return {std::move(f), std::move(map)};
}

double mesh_diameter(const Mesh& m) {
  double h = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) h = std::max(h, m.longest_edge(t));
  return h;
}

}  // namespace isoshell
