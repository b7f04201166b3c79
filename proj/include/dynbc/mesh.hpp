#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace dynbc {

using Point = Eigen::Vector2d;
using Triangle = std::array<std::size_t, 3>;

/// P1 triangulation of a polygonal approximation of the unit disc.
///
/// Nodes are ordered interior first, boundary last: indices
/// [0, n_interior) are interior vertices and [n_interior, n_vertices())
/// lie on the unit circle. boundary_loop lists the boundary vertices once,
/// counterclockwise.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::size_t> boundary_loop;
  std::size_t n_interior = 0;
  std::size_t n_boundary = 0;

  std::size_t n_vertices() const { return vertices.size(); }
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

inline double triangle_area(const Mesh& mesh, const Triangle& t) {
  return signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
}

/// Sum of (signed) triangle areas.
inline double total_area(const Mesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles) area += triangle_area(mesh, t);
  return area;
}

/// Length of the boundary polygon.
inline double perimeter(const Mesh& mesh) {
  double len = 0.0;
  const std::size_t n = mesh.boundary_loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    len += (mesh.vertices[mesh.boundary_loop[(k + 1) % n]] - mesh.vertices[mesh.boundary_loop[k]]).norm();
  }
  return len;
}

/// Maximum edge length over all triangles.
inline double mesh_width(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      h = std::max(h, (mesh.vertices[t[(e + 1) % 3]] - mesh.vertices[t[e]]).norm());
    }
  }
  return h;
}

/// Smallest interior angle (radians) over all triangles.
inline double min_angle(const Mesh& mesh) {
  double result = std::numbers::pi;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Point a = mesh.vertices[t[(e + 1) % 3]] - mesh.vertices[t[e]];
      const Point b = mesh.vertices[t[(e + 2) % 3]] - mesh.vertices[t[e]];
      const double c = a.dot(b) / (a.norm() * b.norm());
      result = std::min(result, std::acos(std::clamp(c, -1.0, 1.0)));
    }
  }
  return result;
}

namespace detail {

inline void append_ccw(Mesh& mesh, std::size_t a, std::size_t b, std::size_t c) {
  if (signed_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) < 0.0) std::swap(b, c);
  mesh.triangles.push_back({a, b, c});
}

// Triangulates the annulus between two concentric rings given by their first
// vertex index and count. At each step the shorter of the two candidate
// diagonals is inserted.
inline void stitch_rings(Mesh& mesh, std::size_t inner_first, std::size_t n_inner,
                         std::size_t outer_first, std::size_t n_outer) {
  const auto& v = mesh.vertices;
  // start the outer walk at the outer vertex closest to inner vertex 0
  std::size_t offset = 0;
  for (std::size_t j = 1; j < n_outer; ++j) {
    if ((v[outer_first + j] - v[inner_first]).norm() < (v[outer_first + offset] - v[inner_first]).norm()) {
      offset = j;
    }
  }
  auto outer = [&](std::size_t j) { return outer_first + (j + offset) % n_outer; };
  auto inner = [&](std::size_t i) { return inner_first + i % n_inner; };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n_inner || j < n_outer) {
    bool advance_inner = j == n_outer;
    if (i < n_inner && j < n_outer) {
      advance_inner = (v[inner(i + 1)] - v[outer(j)]).norm() < (v[outer(j + 1)] - v[inner(i)]).norm();
    }
    if (advance_inner) {
      append_ccw(mesh, inner(i), outer(j), inner(i + 1));
      ++i;
    } else {
      append_ccw(mesh, inner(i), outer(j), outer(j + 1));
      ++j;
    }
  }
}

}  // namespace detail

/// Deterministic concentric-ring mesher for the unit disc.
///
/// Ring k (k = 1..K, K = ceil(1/h_target)) has radius k/K and
/// ceil(2*pi*r_k/h_target) equispaced nodes; the outermost ring lies on the
/// unit circle. Neighbouring rings are stitched along shortest diagonals and the
/// innermost ring is fanned to the centre node.
inline Mesh generate_disc_mesh(double h_target) {
  if (!(h_target > 0.0 && h_target < 1.0)) {
    throw std::invalid_argument("generate_disc_mesh: h_target must lie in (0, 1)");
  }
  const auto n_rings = static_cast<std::size_t>(std::ceil(1.0 / h_target));
  std::vector<std::size_t> ring_size(n_rings + 1, 1);
  std::vector<std::size_t> ring_first(n_rings + 1, 0);

  Mesh mesh;
  mesh.vertices.emplace_back(0.0, 0.0);
  for (std::size_t k = 1; k <= n_rings; ++k) {
    const double radius = static_cast<double>(k) / static_cast<double>(n_rings);
    const auto n = std::max<std::size_t>(
        3, static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * radius / h_target)));
    ring_size[k] = n;
    ring_first[k] = mesh.vertices.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      if (k == n_rings) {
        mesh.vertices.emplace_back(std::cos(angle), std::sin(angle));
      } else {
        mesh.vertices.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
      }
    }
  }

  for (std::size_t j = 0; j < ring_size[1]; ++j) {
    detail::append_ccw(mesh, 0, ring_first[1] + j, ring_first[1] + (j + 1) % ring_size[1]);
  }
  for (std::size_t k = 2; k <= n_rings; ++k) {
    detail::stitch_rings(mesh, ring_first[k - 1], ring_size[k - 1], ring_first[k], ring_size[k]);
  }

  mesh.n_boundary = ring_size[n_rings];
  mesh.n_interior = mesh.vertices.size() - mesh.n_boundary;
  mesh.boundary_loop.resize(mesh.n_boundary);
  for (std::size_t j = 0; j < mesh.n_boundary; ++j) mesh.boundary_loop[j] = mesh.n_interior + j;
  return mesh;
}

/// Plain-text dump: "V T B", then vertices, triangles and the boundary loop.
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' ' << mesh.boundary_loop.size() << '\n';
  const auto old_precision = os.precision(17);
  for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << '\n';
  os.precision(old_precision);
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto b : mesh.boundary_loop) os << b << '\n';
}

}  // namespace dynbc
