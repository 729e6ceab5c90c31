#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace vkfem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point midpoint(const Point& a, const Point& b) {
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

/// parallel: every diagonal runs from the top-left to the bottom-right corner.
enum class LShapeDiagonal { parallel, toward_corner, away_from_corner };

LShapeDiagonal parse_lshape_diagonal(const std::string& name);
std::string to_string(LShapeDiagonal d);

/// Conforming triangulation of a polygonal domain.
///
/// Triangles are counterclockwise. Edges carry the canonical orientation
/// lower vertex index -> higher vertex index, and the canonical edge normal
/// is the tangent rotated by +90 degrees. Local edge e of a triangle is the
/// edge opposite its local vertex e; triangle_edge_signs() stores +1 when the
/// canonical normal points out of the triangle and -1 otherwise.
///
/// Instances are immutable once constructed.
class Triangulation {
 public:
  using Triangle = std::array<int, 3>;
  using Edge = std::array<int, 2>;

  /// Builds edges, signs and boundary flags from a vertex/triangle list.
  /// Triangles given clockwise are rejected.
  Triangulation(std::vector<Point> vertices, std::vector<Triangle> triangles,
                int level = 0, std::vector<int> parent_triangle = {},
                std::string metadata = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  const std::vector<std::array<std::int8_t, 3>>& triangle_edge_signs() const {
    return triangle_edge_signs_;
  }
  const std::vector<char>& boundary_vertex_flags() const { return boundary_vertex_; }
  const std::vector<char>& boundary_edge_flags() const { return boundary_edge_; }
  /// Empty at level 0.
  const std::vector<int>& parent_triangle() const { return parent_triangle_; }
  int level() const { return level_; }
  const std::string& metadata() const { return metadata_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool is_boundary_edge(int e) const { return boundary_edge_[e] != 0; }

  std::array<Point, 3> corners(int t) const;
  double area(int t) const;
  double diameter(int t) const;
  /// Unit canonical normal of edge e.
  Point edge_normal(int e) const;
  double edge_length(int e) const;
  Point edge_midpoint(int e) const;

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<std::int8_t, 3>> triangle_edge_signs_;
  std::vector<char> boundary_vertex_;
  std::vector<char> boundary_edge_;
  std::vector<int> parent_triangle_;
  int level_ = 0;
  std::string metadata_;
};

using TriangulationPtr = std::shared_ptr<const Triangulation>;

/// (-half_width, half_width)^2 split by both diagonals around the center.
Triangulation make_square_crisscross(double half_width = 0.5);

/// (-0.5,0.5)^2 minus [0,0.5]^2 as three squares, each cut by one diagonal.
Triangulation make_lshape(LShapeDiagonal diagonal = LShapeDiagonal::parallel);

/// Uniform red refinement. Parent vertices keep their indices; the midpoint
/// of parent edge e becomes vertex num_vertices() + e. Child 4t+k has parent t,
/// with k = 3 the interior child.
Triangulation red_refine(const Triangulation& mesh);

struct MeshStatistics {
  double h_max = 0.0;
  double min_angle = 0.0;  // radians
  std::size_t interior_vertices = 0;
  std::size_t boundary_vertices = 0;
  std::size_t interior_edges = 0;
  std::size_t boundary_edges = 0;
  double total_area = 0.0;
};

MeshStatistics mesh_statistics(const Triangulation& mesh);

/// Nested sequence T_0, T_1, ..., T_L produced by red refinement.
class MeshHierarchy {
 public:
  MeshHierarchy(Triangulation coarse, int finest_level);

  int finest_level() const { return static_cast<int>(levels_.size()) - 1; }
  const TriangulationPtr& level(int l) const { return levels_.at(static_cast<std::size_t>(l)); }

  /// Ancestor at `coarse_level` of triangle t on `fine_level`, following the
  /// stored parent links.
  int ancestor(int fine_level, int t, int coarse_level) const;

 private:
  std::vector<TriangulationPtr> levels_;
};

/// Plain-text mesh format (`vkfem-mesh 1`).
void write_mesh(std::ostream& out, const Triangulation& mesh);
Triangulation read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const Triangulation& mesh);
Triangulation read_mesh_file(const std::string& path);

}  // namespace vkfem
