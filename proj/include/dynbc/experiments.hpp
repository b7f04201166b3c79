#pragma once

#include <cmath>
#include <numbers>

#include "dynbc/acoustic.hpp"
#include "dynbc/kinetic.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/study_config.hpp"

namespace dynbc {

/// Allen-Cahn reaction -v^3 + v, applied nodewise.
inline Vector allen_cahn(double /*t*/, const Vector& v) { return v - v.cwiseProduct(v).cwiseProduct(v); }

inline NodalFunction bulk_nonlinearity(Nonlinearity n) {
  if (n == Nonlinearity::AllenCahnBulk) return allen_cahn;
  return {};
}

inline NodalFunction surface_nonlinearity(Nonlinearity n) {
  if (n == Nonlinearity::AllenCahnSurface) return allen_cahn;
  return {};
}

/// Scale k of the boundary displacement datum delta0 = k/(2 pi) |x|^1.2.
/// With k = 2 pi the datum equals 1 on the unit circle.
inline constexpr double kDisplacementScale = 2.0 * std::numbers::pi;

template <typename F>
Vector interpolate(const Mesh& mesh, F&& f) {
  Vector v(static_cast<Index>(mesh.n_vertices()));
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) v[static_cast<Index>(i)] = f(mesh.vertices[i]);
  return v;
}

/// Gaussian pulse exp(-20 ((x-1)^2 + y^2)) centred at the boundary point (1, 0).
inline Vector kinetic_initial_displacement(const Mesh& mesh) {
  return interpolate(mesh, [](const Point& x) {
    return std::exp(-20.0 * ((x.x() - 1.0) * (x.x() - 1.0) + x.y() * x.y()));
  });
}

inline KineticProblem make_kinetic_problem(const Mesh& mesh, const StudyConfig& cfg) {
  return make_kinetic_problem(mesh, BilinearParams{cfg.beta, cfg.kappa}, bulk_nonlinearity(cfg.nonlinearity),
                              surface_nonlinearity(cfg.nonlinearity), cfg.final_time);
}

/// Pulse at rest with consistent surface data (p = trace u, r = 0).
inline KineticState kinetic_initial_state(const KineticProblem& prob, const Mesh& mesh) {
  const Vector u0 = kinetic_initial_displacement(mesh);
  return consistent_init(prob, u0, Vector::Zero(u0.size()));
}

inline AcousticProblem make_acoustic_problem(const Mesh& mesh, const StudyConfig& cfg) {
  return make_acoustic_problem(mesh, BilinearParams{cfg.beta, cfg.kappa}, bulk_nonlinearity(cfg.nonlinearity),
                               surface_nonlinearity(cfg.nonlinearity), cfg.final_time);
}

/// u0 = 0, w0 = 2 pi |x|^1.2, delta0 = k/(2 pi) |x|^1.2 on the boundary, zeta0 = 0.
inline AcousticState acoustic_initial_state(const Mesh& mesh) {
  AcousticState s;
  s.u = Vector::Zero(static_cast<Index>(mesh.n_vertices()));
  s.w = interpolate(mesh, [](const Point& x) { return 2.0 * std::numbers::pi * std::pow(x.squaredNorm(), 0.6); });
  s.delta.resize(static_cast<Index>(mesh.n_boundary));
  for (std::size_t j = 0; j < mesh.n_boundary; ++j) {
    const Point& x = mesh.vertices[mesh.n_interior + j];
    s.delta[static_cast<Index>(j)] = kDisplacementScale / (2.0 * std::numbers::pi) * std::pow(x.squaredNorm(), 0.6);
  }
  s.zeta = Vector::Zero(static_cast<Index>(mesh.n_boundary));
  return s;
}

}  // namespace dynbc
