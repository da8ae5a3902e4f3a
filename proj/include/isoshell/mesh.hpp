#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace isoshell {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// A straight boundary segment, used to declare the clamped part Gamma_D.
struct Segment {
  Vec2 p;
  Vec2 q;
};

/// Mesh edge with canonical orientation (lower vertex index first).
struct Edge {
  int a = -1;
  int b = -1;
  Vec2 midpoint = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();  // unit vector pointing from a to b
  std::array<int, 2> tri = {-1, -1};
};

enum class Domain { unit_square, l_shape };

/// Triangulation of the parameter domain. Immutable after construction;
/// refinement produces a new mesh.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> tri_edges;  // edge (v0,v1),(v1,v2),(v2,v0)
  std::vector<char> is_dirichlet;             // per vertex
  std::vector<int> dirichlet_nodes;
  std::vector<Segment> dirichlet_segments;
  int level = 0;
  double h = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  double longest_edge(int t) const;
};

/// Classification of fine vertices relative to the coarse mesh.
struct ProlongationMap {
  int n_coarse_vertices = 0;
  std::vector<int> from_vertex;  // coarse vertex index or -1
  std::vector<int> from_edge;    // coarse edge index or -1
};

Mesh build_initial_mesh(Domain domain, const std::vector<Segment>& dirichlet_spec);

std::pair<Mesh, ProlongationMap> red_refine(const Mesh& m);

double mesh_diameter(const Mesh& m);

/// Absolute tolerance for point-on-segment tests (all generated coordinates
/// are dyadic rationals).
inline constexpr double kGeomTol = 1e-12;

bool point_on_segment(const Vec2& x, const Segment& s, double tol = kGeomTol);

}  // namespace isoshell
