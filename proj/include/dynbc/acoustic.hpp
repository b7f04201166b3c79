#pragma once

#include <optional>
#include <stdexcept>

#include "dynbc/assembly.hpp"
#include "dynbc/kinetic.hpp"
#include "dynbc/timestep.hpp"
#include "dynbc/trajectory.hpp"

namespace dynbc {

/// Wave equation with acoustic boundary conditions: bulk potential u and
/// normal boundary displacement delta, coupled through the skew first-order
/// term [[0, -B^T], [B, 0]] with B = [0  M_surf].
struct AcousticProblem {
  BlockSystem blocks;
  BilinearParams params;
  NodalFunction f_bulk;
  NodalFunction f_surf;
  double final_time = 1.0;

  Vector bulk_load(double t, const Vector& u) const {
    if (!f_bulk) return Vector::Zero(blocks.n_bulk);
    return nodal_load(blocks.M_bulk, f_bulk(t, u));
  }

  Vector surface_load(double t, const Vector& delta) const {
    if (!f_surf) return Vector::Zero(blocks.n_surf);
    return nodal_load(blocks.M_surf, f_surf(t, delta));
  }
};

inline AcousticProblem make_acoustic_problem(const Mesh& mesh, const BilinearParams& params,
                                             NodalFunction f_bulk = {}, NodalFunction f_surf = {},
                                             double final_time = 1.0) {
  return AcousticProblem{assemble_block_system(mesh, params, CouplingKind::Acoustic), params, std::move(f_bulk),
                         std::move(f_surf), final_time};
}

struct AcousticState {
  Vector u, w;
  Vector delta, zeta;
  double t = 0.0;
};

/// 1/2 (u^T A_bulk u + delta^T A_surf delta + w^T M_bulk w + zeta^T M_surf zeta).
inline double energy_acoustic(const AcousticProblem& prob, const AcousticState& s) {
  const auto& b = prob.blocks;
  return 0.5 * (s.u.dot(b.A_bulk * s.u) + s.delta.dot(b.A_surf * s.delta) + s.w.dot(b.M_bulk * s.w) +
                s.zeta.dot(b.M_surf * s.zeta));
}

enum class AcousticScheme { LieEuler, StrangCrankNicolson };

/// Bulk/surface splitting for acoustic boundary conditions.
///
/// The bulk substep freezes the boundary velocity zeta (load B^T zeta), the
/// boundary substep freezes the bulk velocity (load -B w). LieEuler runs
/// both with implicit Euler over the full step; StrangCrankNicolson runs
/// bulk (tau/2), boundary (tau), bulk (tau/2) with IMEX Crank-Nicolson.
///
/// The problem must outlive the splitting object.
class AcousticSplitting {
 public:
  AcousticSplitting(const AcousticProblem& prob, AcousticScheme scheme, double tau, LinearSolveOptions opts = {})
      : prob_(&prob), scheme_(scheme), tau_(tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("AcousticSplitting: tau must be positive");
    const auto& b = prob.blocks;
    const auto bulk_sys = undamped_system(b.M_bulk, b.A_bulk);
    const auto surf_sys = undamped_system(b.M_surf, b.A_surf);
    if (scheme == AcousticScheme::LieEuler) {
      bulk_euler_.emplace(bulk_sys, tau, opts);
      surf_euler_.emplace(surf_sys, tau, opts);
    } else {
      bulk_cn_.emplace(bulk_sys, 0.5 * tau, opts);
      surf_cn_.emplace(surf_sys, tau, opts);
    }
    bt_ = b.B.transpose();
  }

  double tau() const { return tau_; }

  AcousticState step(const AcousticState& s) const {
    return scheme_ == AcousticScheme::LieEuler ? lie_euler(s) : strang_cn(s);
  }

 private:
  AcousticState lie_euler(const AcousticState& s) const {
    const auto& b = prob_->blocks;
    const double t1 = s.t + tau_;
    const StepState bulk = bulk_euler_->step({s.u, s.w, s.t}, prob_->bulk_load(t1, s.u) + bt_ * s.zeta);
    const StepState surf =
        surf_euler_->step({s.delta, s.zeta, s.t}, prob_->surface_load(t1, s.delta) - b.B * bulk.w);
    return {bulk.u, bulk.w, surf.u, surf.w, t1};
  }

  AcousticState strang_cn(const AcousticState& s) const {
    const auto& b = prob_->blocks;
    const double t_half = s.t + 0.5 * tau_;
    const double t1 = s.t + tau_;
    const Vector coupling0 = bt_ * s.zeta;
    Vector f_half;
    const StepState half = bulk_cn_->step({s.u, s.w, s.t}, prob_->bulk_load(s.t, s.u) + coupling0,
                                          [&](const Vector& u_new) {
                                            f_half = prob_->bulk_load(t_half, u_new);
                                            return Vector(f_half + coupling0);
                                          });
    const Vector push = b.B * half.w;
    const StepState surf = surf_cn_->step({s.delta, s.zeta, s.t}, prob_->surface_load(s.t, s.delta) - push,
                                          [&](const Vector& d_new) {
                                            return Vector(prob_->surface_load(t1, d_new) - push);
                                          });
    const Vector coupling1 = bt_ * surf.w;
    const StepState bulk = bulk_cn_->step(half, f_half + coupling1, [&](const Vector& u_new) {
      return Vector(prob_->bulk_load(t1, u_new) + coupling1);
    });
    return {bulk.u, bulk.w, surf.u, surf.w, t1};
  }

  const AcousticProblem* prob_;
  AcousticScheme scheme_;
  double tau_;
  SparseMatrix bt_;
  std::optional<ImplicitEulerStepper> bulk_euler_;
  std::optional<ImplicitEulerStepper> surf_euler_;
  std::optional<CrankNicolsonStepper> bulk_cn_;
  std::optional<CrankNicolsonStepper> surf_cn_;
};

inline AcousticState lie_euler_step(const AcousticProblem& prob, const AcousticState& s, double tau) {
  return AcousticSplitting(prob, AcousticScheme::LieEuler, tau).step(s);
}

inline AcousticState strang_cn_step(const AcousticProblem& prob, const AcousticState& s, double tau) {
  return AcousticSplitting(prob, AcousticScheme::StrangCrankNicolson, tau).step(s);
}

inline Trajectory run_acoustic_splitting(const AcousticProblem& prob, const AcousticState& init,
                                         AcousticScheme scheme, double tau, LinearSolveOptions opts = {}) {
  const std::size_t n_steps = step_count(prob.final_time, tau, "run_acoustic_splitting");
  const AcousticSplitting splitting(prob, scheme, tau, opts);
  Trajectory traj;
  traj.sample_dt = tau;
  AcousticState s = init;
  traj.push(s.t, s.u, s.delta, energy_acoustic(prob, s));
  for (std::size_t n = 0; n < n_steps; ++n) {
    s = splitting.step(s);
    traj.push(s.t, s.u, s.delta, energy_acoustic(prob, s));
  }
  return traj;
}

/// Full coupled system on (u, delta): M = diag(M_bulk, M_surf),
/// D = [[0, -B^T], [B, 0]], A = diag(A_bulk, A_surf).
inline SecondOrderSystem acoustic_monolithic_system(const AcousticProblem& prob) {
  const auto& b = prob.blocks;
  const Index n = b.n_bulk + b.n_surf;
  std::vector<Triplet> m;
  std::vector<Triplet> d;
  std::vector<Triplet> a;
  auto add = [](std::vector<Triplet>& out, const SparseMatrix& src, Index r0, Index c0, double scale) {
    for (Index r = 0; r < src.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(src, r); it; ++it) out.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
    }
  };
  add(m, b.M_bulk, 0, 0, 1.0);
  add(m, b.M_surf, b.n_bulk, b.n_bulk, 1.0);
  add(a, b.A_bulk, 0, 0, 1.0);
  add(a, b.A_surf, b.n_bulk, b.n_bulk, 1.0);
  const SparseMatrix bt = b.B.transpose();
  add(d, bt, 0, b.n_bulk, -1.0);
  add(d, b.B, b.n_bulk, 0, 1.0);
  SecondOrderSystem sys;
  sys.mass = SparseMatrix(n, n);
  sys.damping = SparseMatrix(n, n);
  sys.stiffness = SparseMatrix(n, n);
  sys.mass.setFromTriplets(m.begin(), m.end());
  sys.damping.setFromTriplets(d.begin(), d.end());
  sys.stiffness.setFromTriplets(a.begin(), a.end());
  return sys;
}

/// Monolithic IMEX Crank-Nicolson reference, sampled at multiples of sample_dt.
inline Trajectory acoustic_reference_solve(const AcousticProblem& prob, const AcousticState& init, double tau_ref,
                                           double sample_dt, LinearSolveOptions opts = {}) {
  const auto& b = prob.blocks;
  require_dims(init.u.size() == b.n_bulk && init.delta.size() == b.n_surf, "acoustic_reference_solve");
  const std::size_t n_steps = step_count(prob.final_time, tau_ref, "acoustic_reference_solve");
  const std::size_t stride = step_count(sample_dt, tau_ref, "acoustic_reference_solve sampling");
  if (n_steps % stride != 0) throw std::invalid_argument("acoustic_reference_solve: sampling grid misses final time");

  const auto sys = acoustic_monolithic_system(prob);
  const CrankNicolsonStepper stepper(sys, tau_ref, opts);
  auto load = [&](double t, const Vector& x) {
    return concat(prob.bulk_load(t, x.head(b.n_bulk)), prob.surface_load(t, x.tail(b.n_surf)));
  };
  Trajectory traj;
  traj.sample_dt = sample_dt;
  StepState s{concat(init.u, init.delta), concat(init.w, init.zeta), init.t};
  auto record = [&] {
    traj.push(s.t, s.u.head(b.n_bulk), s.u.tail(b.n_surf), quadratic_energy(sys.mass, sys.stiffness, s.u, s.w));
  };
  record();
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t_next = init.t + static_cast<double>(n) * tau_ref;
    s = stepper.step(s, load(s.t, s.u), [&](const Vector& x_new) { return load(t_next, x_new); });
    s.t = t_next;
    if (n % stride == 0) record();
  }
  return traj;
}

}  // namespace dynbc
