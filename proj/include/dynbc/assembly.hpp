#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dynbc/linalg.hpp"
#include "dynbc/mesh.hpp"

namespace dynbc {

/// Coefficients of the surface operator  beta * (-Laplace-Beltrami) + kappa.
struct BilinearParams {
  double beta = 1.0;
  double kappa = 1.0;

  void validate() const {
    if (!(beta >= 0.0) || !(kappa >= 0.0)) {
      throw std::invalid_argument("BilinearParams: beta and kappa must be non-negative");
    }
  }
};

enum class CouplingKind { Kinetic, Acoustic };

struct MassStiffness {
  SparseMatrix mass;
  SparseMatrix stiffness;
};

/// P1 consistent mass and stiffness over all triangles of the mesh.
inline MassStiffness assemble_bulk(const Mesh& mesh) {
  const auto n = static_cast<Index>(mesh.n_vertices());
  std::vector<Triplet> mass;
  std::vector<Triplet> stiff;
  mass.reserve(9 * mesh.triangles.size());
  stiff.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const double area = triangle_area(mesh, t);
    if (area <= 1e-14) throw std::invalid_argument("assemble_bulk: degenerate or inverted triangle");
    // gradient of the hat function of local vertex i is (b_i, c_i) / (2 area)
    double b[3];
    double c[3];
    for (int i = 0; i < 3; ++i) {
      const Point& pj = mesh.vertices[t[(i + 1) % 3]];
      const Point& pk = mesh.vertices[t[(i + 2) % 3]];
      b[i] = pj.y() - pk.y();
      c[i] = pk.x() - pj.x();
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const auto gi = static_cast<Index>(t[i]);
        const auto gj = static_cast<Index>(t[j]);
        mass.emplace_back(gi, gj, area / 12.0 * (i == j ? 2.0 : 1.0));
        stiff.emplace_back(gi, gj, (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
      }
    }
  }
  MassStiffness result{SparseMatrix(n, n), SparseMatrix(n, n)};
  result.mass.setFromTriplets(mass.begin(), mass.end());
  result.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  return result;
}

/// 1D P1 mass and tangential stiffness on the closed boundary polygon.
/// The returned stiffness is the pure Laplace-Beltrami part (beta = 1, kappa = 0).
inline MassStiffness assemble_surface_parts(const Mesh& mesh) {
  const auto n = static_cast<Index>(mesh.n_boundary);
  std::vector<Triplet> mass;
  std::vector<Triplet> stiff;
  const std::size_t n_edges = mesh.boundary_loop.size();
  for (std::size_t k = 0; k < n_edges; ++k) {
    const std::size_t va = mesh.boundary_loop[k];
    const std::size_t vb = mesh.boundary_loop[(k + 1) % n_edges];
    const double len = (mesh.vertices[vb] - mesh.vertices[va]).norm();
    if (len <= 1e-14) throw std::invalid_argument("assemble_surface: zero-length boundary edge");
    const Index dofs[2] = {static_cast<Index>(va - mesh.n_interior), static_cast<Index>(vb - mesh.n_interior)};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        mass.emplace_back(dofs[i], dofs[j], len / 6.0 * (i == j ? 2.0 : 1.0));
        stiff.emplace_back(dofs[i], dofs[j], (i == j ? 1.0 : -1.0) / len);
      }
    }
  }
  MassStiffness result{SparseMatrix(n, n), SparseMatrix(n, n)};
  result.mass.setFromTriplets(mass.begin(), mass.end());
  result.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  return result;
}

/// Surface mass M_surf and A_surf = beta * (tangential stiffness) + kappa * M_surf.
inline MassStiffness assemble_surface(const Mesh& mesh, const BilinearParams& params) {
  params.validate();
  auto parts = assemble_surface_parts(mesh);
  parts.stiffness = add_scaled(parts.stiffness, parts.mass, params.beta, params.kappa);
  return parts;
}

/// Kinetic: B = [0  M_surf  -M_surf] acting on (u1, u2, p).
/// Acoustic: B = [0  M_surf] acting on (u1, u2).
inline SparseMatrix assemble_coupling(const Mesh& mesh, const SparseMatrix& surface_mass, CouplingKind kind) {
  const auto n_surf = static_cast<Index>(mesh.n_boundary);
  const auto n_int = static_cast<Index>(mesh.n_interior);
  require_dims(surface_mass.rows() == n_surf && surface_mass.cols() == n_surf, "assemble_coupling");
  const Index n_cols = kind == CouplingKind::Kinetic ? n_int + 2 * n_surf : n_int + n_surf;
  std::vector<Triplet> entries;
  for (Index r = 0; r < surface_mass.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(surface_mass, r); it; ++it) {
      entries.emplace_back(it.row(), n_int + it.col(), it.value());
      if (kind == CouplingKind::Kinetic) entries.emplace_back(it.row(), n_int + n_surf + it.col(), -it.value());
    }
  }
  SparseMatrix b(n_surf, n_cols);
  b.setFromTriplets(entries.begin(), entries.end());
  return b;
}

/// Kinetic constraint residual B (u; p) evaluated as M_surf (u2 - p), which is
/// exactly zero whenever the trace of u equals p.
inline Vector kinetic_constraint_residual(const SparseMatrix& surface_mass, const Vector& u, const Vector& p) {
  require_dims(p.size() == surface_mass.rows() && u.size() >= p.size(), "kinetic_constraint_residual");
  return surface_mass * (u.tail(p.size()) - p);
}

/// Discrete load M * g for nodal values g of a nonlinearity.
inline Vector nodal_load(const SparseMatrix& m, const Vector& g) { return spmv(m, g); }

/// All semi-discrete operators plus the interior/boundary partition of the
/// bulk matrices (index 1: interior dofs, index 2: boundary dofs).
struct BlockSystem {
  Index n_bulk = 0;
  Index n_surf = 0;
  SparseMatrix M_bulk, A_bulk;
  SparseMatrix M_surf, A_surf;
  /// beta = 1, kappa = 0 surface stiffness; used for H1(Gamma) norms.
  SparseMatrix L_surf;
  SparseMatrix B;
  SparseMatrix M11, M12, M21, M22;
  SparseMatrix A11, A12, A21, A22;
  CouplingKind kind = CouplingKind::Kinetic;

  Index n_interior() const { return n_bulk - n_surf; }
};

inline BlockSystem assemble_block_system(const Mesh& mesh, const BilinearParams& params, CouplingKind kind) {
  params.validate();
  BlockSystem sys;
  sys.kind = kind;
  sys.n_bulk = static_cast<Index>(mesh.n_vertices());
  sys.n_surf = static_cast<Index>(mesh.n_boundary);
  auto bulk = assemble_bulk(mesh);
  sys.M_bulk = std::move(bulk.mass);
  sys.A_bulk = std::move(bulk.stiffness);
  auto surf = assemble_surface_parts(mesh);
  sys.M_surf = surf.mass;
  sys.L_surf = surf.stiffness;
  sys.A_surf = add_scaled(surf.stiffness, surf.mass, params.beta, params.kappa);
  sys.B = assemble_coupling(mesh, sys.M_surf, kind);

  const Index n1 = sys.n_interior();
  const Index n2 = sys.n_surf;
  sys.M11 = extract_block(sys.M_bulk, 0, 0, n1, n1);
  sys.M12 = extract_block(sys.M_bulk, 0, n1, n1, n2);
  sys.M21 = extract_block(sys.M_bulk, n1, 0, n2, n1);
  sys.M22 = extract_block(sys.M_bulk, n1, n1, n2, n2);
  sys.A11 = extract_block(sys.A_bulk, 0, 0, n1, n1);
  sys.A12 = extract_block(sys.A_bulk, 0, n1, n1, n2);
  sys.A21 = extract_block(sys.A_bulk, n1, 0, n2, n1);
  sys.A22 = extract_block(sys.A_bulk, n1, n1, n2, n2);
  return sys;
}

}  // namespace dynbc
