#include "vkfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "vkfem/errors.hpp"

namespace vkfem {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LShapeDiagonal parse_lshape_diagonal(const std::string& name) {
  if (name == "parallel") return LShapeDiagonal::parallel;
  if (name == "toward_corner") return LShapeDiagonal::toward_corner;
  if (name == "away_from_corner") return LShapeDiagonal::away_from_corner;
  throw ParseError("unknown lshape_diagonal '" + name + "'");
}

std::string to_string(LShapeDiagonal d) {
  switch (d) {
    case LShapeDiagonal::parallel:
      return "parallel";
    case LShapeDiagonal::toward_corner:
      return "toward_corner";
    case LShapeDiagonal::away_from_corner:
      return "away_from_corner";
  }
  return "unknown";
}

Triangulation::Triangulation(std::vector<Point> vertices, std::vector<Triangle> triangles,
                             int level, std::vector<int> parent_triangle, std::string metadata)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      parent_triangle_(std::move(parent_triangle)),
      level_(level),
      metadata_(std::move(metadata)) {
  const auto nv = static_cast<std::int64_t>(vertices_.size());
  if (triangles_.empty()) throw std::invalid_argument("triangulation without triangles");
  if (level_ < 0) throw std::invalid_argument("negative refinement level");
  if (!parent_triangle_.empty() && parent_triangle_.size() != triangles_.size())
    throw std::invalid_argument("parent_triangle size does not match triangle count");

  std::unordered_map<std::int64_t, int> edge_index;
  edge_index.reserve(triangles_.size() * 2);
  std::vector<int> edge_use;
  triangle_edges_.resize(triangles_.size());
  triangle_edge_signs_.resize(triangles_.size());

  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw std::invalid_argument("triangle references unknown vertex");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw std::invalid_argument("triangle with repeated vertex");
    if (signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) <= 0.0)
      throw std::invalid_argument("triangle " + std::to_string(t) + " is not counterclockwise");

    for (int e = 0; e < 3; ++e) {
      const int a = tri[(e + 1) % 3];
      const int b = tri[(e + 2) % 3];
      const int lo = std::min(a, b);
      const int hi = std::max(a, b);
      const std::int64_t key = static_cast<std::int64_t>(lo) * nv + hi;
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({lo, hi});
        edge_use.push_back(0);
      }
      const int idx = it->second;
      if (++edge_use[idx] > 2)
        throw std::invalid_argument("edge shared by more than two triangles");
      triangle_edges_[t][e] = idx;
      // Local traversal a->b is counterclockwise, so the outward normal is the
      // tangent rotated by -90 degrees; the canonical normal (+90 degrees of
      // lo->hi) is outward exactly when lo->hi runs against a->b.
      triangle_edge_signs_[t][e] = static_cast<std::int8_t>(a == lo ? -1 : 1);
    }
  }

  boundary_edge_.assign(edges_.size(), 0);
  boundary_vertex_.assign(vertices_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_use[e] == 1) {
      boundary_edge_[e] = 1;
      boundary_vertex_[edges_[e][0]] = 1;
      boundary_vertex_[edges_[e][1]] = 1;
    }
  }
}

std::array<Point, 3> Triangulation::corners(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double Triangulation::area(int t) const {
  const auto c = corners(t);
  return signed_area(c[0], c[1], c[2]);
}

double Triangulation::diameter(int t) const {
  const auto c = corners(t);
  return std::max({distance(c[0], c[1]), distance(c[1], c[2]), distance(c[2], c[0])});
}

Point Triangulation::edge_normal(int e) const {
  const Point& a = vertices_[edges_[e][0]];
  const Point& b = vertices_[edges_[e][1]];
  const double len = distance(a, b);
  return {-(b.y - a.y) / len, (b.x - a.x) / len};
}

double Triangulation::edge_length(int e) const {
  return distance(vertices_[edges_[e][0]], vertices_[edges_[e][1]]);
}

Point Triangulation::edge_midpoint(int e) const {
  return midpoint(vertices_[edges_[e][0]], vertices_[edges_[e][1]]);
}

Triangulation make_square_crisscross(double half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
  const double w = half_width;
  std::vector<Point> v{{-w, -w}, {w, -w}, {w, w}, {-w, w}, {0.0, 0.0}};
  std::vector<Triangulation::Triangle> t{{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return Triangulation(std::move(v), std::move(t), 0, {}, "domain=square");
}

Triangulation make_lshape(LShapeDiagonal diagonal) {
  //  6---7
  //  |   |
  //  3---4---5
  //  |   |   |
  //  0---1---2
  std::vector<Point> v{{-0.5, -0.5}, {0.0, -0.5}, {0.5, -0.5}, {-0.5, 0.0},
                       {0.0, 0.0},   {0.5, 0.0},  {-0.5, 0.5}, {0.0, 0.5}};
  std::vector<Triangulation::Triangle> t;
  if (diagonal == LShapeDiagonal::parallel) {
    t = {{0, 1, 3}, {1, 4, 3},   // diagonal 1-3
         {1, 2, 4}, {2, 5, 4},   // diagonal 2-4
         {3, 4, 6}, {4, 7, 6}};  // diagonal 4-6
  } else if (diagonal == LShapeDiagonal::toward_corner) {
    // every diagonal ends at the re-entrant corner (vertex 4)
    t = {{0, 1, 4}, {0, 4, 3},   // bottom-left, diagonal 0-4
         {1, 2, 4}, {2, 5, 4},   // bottom-right, diagonal 2-4
         {3, 4, 6}, {4, 7, 6}};  // top-left, diagonal 4-6
  } else {
    t = {{0, 1, 3}, {1, 4, 3},   // diagonal 1-3
         {1, 2, 5}, {1, 5, 4},   // diagonal 1-5
         {3, 4, 7}, {3, 7, 6}};  // diagonal 3-7
  }
  return Triangulation(std::move(v), std::move(t), 0, {},
                       "domain=lshape lshape_diagonal=" + to_string(diagonal));
}

Triangulation red_refine(const Triangulation& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  std::vector<Point> vertices = mesh.vertices();
  vertices.reserve(mesh.num_vertices() + mesh.num_edges());
  for (const auto& e : mesh.edges()) vertices.push_back(midpoint(vertices[e[0]], vertices[e[1]]));

  std::vector<Triangulation::Triangle> children;
  std::vector<int> parents;
  children.reserve(4 * mesh.num_triangles());
  parents.reserve(4 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto [a, b, c] = mesh.triangles()[t];
    const auto& te = mesh.triangle_edges()[t];
    const int ma = nv + te[0];  // midpoint opposite a
    const int mb = nv + te[1];
    const int mc = nv + te[2];
    children.push_back({a, mc, mb});
    children.push_back({mc, b, ma});
    children.push_back({mb, ma, c});
    children.push_back({ma, mb, mc});
    for (int k = 0; k < 4; ++k) parents.push_back(static_cast<int>(t));
  }
  return Triangulation(std::move(vertices), std::move(children), mesh.level() + 1,
                       std::move(parents), mesh.metadata());
}

MeshStatistics mesh_statistics(const Triangulation& mesh) {
  MeshStatistics s;
  s.min_angle = std::numbers::pi;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    s.h_max = std::max(s.h_max, mesh.diameter(ti));
    s.total_area += mesh.area(ti);
    const auto c = mesh.corners(ti);
    for (int k = 0; k < 3; ++k) {
      const Point& p = c[k];
      const Point& q = c[(k + 1) % 3];
      const Point& r = c[(k + 2) % 3];
      const double ux = q.x - p.x, uy = q.y - p.y, vx = r.x - p.x, vy = r.y - p.y;
      const double angle = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      s.min_angle = std::min(s.min_angle, angle);
    }
  }
  for (char b : mesh.boundary_vertex_flags()) (b ? s.boundary_vertices : s.interior_vertices)++;
  for (char b : mesh.boundary_edge_flags()) (b ? s.boundary_edges : s.interior_edges)++;
  return s;
}

MeshHierarchy::MeshHierarchy(Triangulation coarse, int finest_level) {
  if (finest_level < 0) throw std::invalid_argument("negative finest level");
  if (coarse.level() != 0) throw std::invalid_argument("hierarchy must start at level 0");
  levels_.push_back(std::make_shared<const Triangulation>(std::move(coarse)));
  for (int l = 1; l <= finest_level; ++l)
    levels_.push_back(std::make_shared<const Triangulation>(red_refine(*levels_.back())));
}

int MeshHierarchy::ancestor(int fine_level, int t, int coarse_level) const {
  if (coarse_level > fine_level || coarse_level < 0 || fine_level > finest_level())
    throw std::invalid_argument("invalid level pair for ancestor lookup");
  for (int l = fine_level; l > coarse_level; --l) t = levels_[l]->parent_triangle()[t];
  return t;
}

void write_mesh(std::ostream& out, const Triangulation& mesh) {
  out << "vkfem-mesh 1\n";
  out << "vertices " << mesh.num_vertices() << '\n';
  for (const auto& p : mesh.vertices()) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  out << "triangles " << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Triangulation read_mesh(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "vkfem-mesh" || version != 1)
    throw ParseError("mesh file: expected header 'vkfem-mesh 1'");
  std::string keyword;
  std::size_t n = 0;
  if (!(in >> keyword >> n) || keyword != "vertices")
    throw ParseError("mesh file: expected 'vertices <n>'");
  std::vector<Point> vertices(n);
  for (auto& p : vertices) {
    if (!(in >> p.x >> p.y)) throw ParseError("mesh file: truncated vertex list");
  }
  std::size_t m = 0;
  if (!(in >> keyword >> m) || keyword != "triangles")
    throw ParseError("mesh file: expected 'triangles <m>'");
  std::vector<Triangulation::Triangle> triangles(m);
  for (auto& t : triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw ParseError("mesh file: truncated triangle list");
  }
  try {
    return Triangulation(std::move(vertices), std::move(triangles), 0, {}, "domain=file");
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("mesh file: ") + e.what());
  }
}

void write_mesh_file(const std::string& path, const Triangulation& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Triangulation read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_mesh(in);
}

}  // namespace vkfem
