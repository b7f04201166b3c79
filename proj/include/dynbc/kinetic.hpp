#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "dynbc/assembly.hpp"
#include "dynbc/timestep.hpp"
#include "dynbc/trajectory.hpp"

namespace dynbc {

/// Nonlinearity evaluated nodewise: (t, nodal values) -> nodal values.
using NodalFunction = std::function<Vector(double t, const Vector& values)>;

enum class Splitting { Lie, Strang };
enum class Substepper { Euler, CrankNicolson };

/// Wave equation with kinetic boundary conditions, written as the
/// bulk/surface system coupled through the trace constraint u2 = p.
struct KineticProblem {
  BlockSystem blocks;
  BilinearParams params;
  NodalFunction f_bulk;  ///< empty means zero
  NodalFunction f_surf;  ///< empty means zero
  double final_time = 1.0;

  Index n_interior() const { return blocks.n_interior(); }
  Index n_surf() const { return blocks.n_surf; }

  /// M_bulk * f_bulk(t, u), u = (u1, u2).
  Vector bulk_load(double t, const Vector& u) const {
    if (!f_bulk) return Vector::Zero(blocks.n_bulk);
    return nodal_load(blocks.M_bulk, f_bulk(t, u));
  }

  Vector surface_load(double t, const Vector& p) const {
    if (!f_surf) return Vector::Zero(blocks.n_surf);
    return nodal_load(blocks.M_surf, f_surf(t, p));
  }
};

inline KineticProblem make_kinetic_problem(const Mesh& mesh, const BilinearParams& params, NodalFunction f_bulk = {},
                                           NodalFunction f_surf = {}, double final_time = 1.0) {
  return KineticProblem{assemble_block_system(mesh, params, CouplingKind::Kinetic), params, std::move(f_bulk),
                        std::move(f_surf), final_time};
}

/// Interior part (u1, w1), trace part (u2, w2), surface (p, r) and the
/// running approximation pdd of p''.
struct KineticState {
  Vector u1, u2, w1, w2;
  Vector p, r, pdd;
  double t = 0.0;

  Vector u() const {
    Vector out(u1.size() + u2.size());
    out << u1, u2;
    return out;
  }
  Vector w() const {
    Vector out(w1.size() + w2.size());
    out << w1, w2;
    return out;
  }
};

inline Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

/// Accelerations and multiplier of the semi-discrete index-3 system at one instant.
struct KineticAccelerations {
  Vector u_dd;
  Vector p_dd;
  Vector multiplier;
};

/// Solves
///   [diag(M_bulk, M_surf)  B^T] [u''; p''; lambda]   [f - A (u; p)]
///   [B                     0  ]                    = [0           ]
/// i.e. the dynamic equations together with the twice differentiated constraint.
inline KineticAccelerations kinetic_accelerations(const KineticProblem& prob, double t, const Vector& u,
                                                  const Vector& p) {
  const auto& b = prob.blocks;
  require_dims(u.size() == b.n_bulk && p.size() == b.n_surf, "kinetic_accelerations");
  const Index n = b.n_bulk + 2 * b.n_surf;
  std::vector<Triplet> entries;
  auto add = [&entries](const SparseMatrix& m, Index r0, Index c0, double scale) {
    for (Index r = 0; r < m.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
        entries.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
      }
    }
  };
  add(b.M_bulk, 0, 0, 1.0);
  add(b.M_surf, b.n_bulk, b.n_bulk, 1.0);
  add(b.B, b.n_bulk + b.n_surf, 0, 1.0);
  const SparseMatrix bt = b.B.transpose();
  add(bt, 0, b.n_bulk + b.n_surf, 1.0);
  SparseMatrix saddle(n, n);
  saddle.setFromTriplets(entries.begin(), entries.end());

  Vector rhs = Vector::Zero(n);
  rhs.head(b.n_bulk) = prob.bulk_load(t, u) - b.A_bulk * u;
  rhs.segment(b.n_bulk, b.n_surf) = prob.surface_load(t, p) - b.A_surf * p;
  const Vector x = LuSolver(saddle).solve(rhs);
  return {x.head(b.n_bulk), x.segment(b.n_bulk, b.n_surf), x.tail(b.n_surf)};
}

/// Initial state with p = trace(u0), r = trace(w0) and p'' from the
/// consistent accelerations of the constrained system.
inline KineticState consistent_init(const KineticProblem& prob, const Vector& u0, const Vector& w0,
                                    double t0 = 0.0) {
  const Index n1 = prob.n_interior();
  const Index n2 = prob.n_surf();
  require_dims(u0.size() == n1 + n2 && w0.size() == n1 + n2, "consistent_init");
  KineticState s;
  s.u1 = u0.head(n1);
  s.u2 = u0.tail(n2);
  s.w1 = w0.head(n1);
  s.w2 = w0.tail(n2);
  s.p = s.u2;
  s.r = s.w2;
  s.pdd = kinetic_accelerations(prob, t0, u0, s.p).p_dd;
  s.t = t0;
  return s;
}

/// 1/2 (u^T A_bulk u + p^T A_surf p + w^T M_bulk w + r^T M_surf r).
inline double energy_kinetic(const KineticProblem& prob, const KineticState& s) {
  const auto& b = prob.blocks;
  const Vector u = s.u();
  const Vector w = s.w();
  return 0.5 * (u.dot(b.A_bulk * u) + s.p.dot(b.A_surf * s.p) + w.dot(b.M_bulk * w) + s.r.dot(b.M_surf * s.r));
}

/// Bulk/surface splitting for kinetic boundary conditions with a fixed step.
///
/// The bulk substep integrates the interior dofs with Dirichlet data p and
/// p'' frozen; the boundary substep integrates p with the freshly updated
/// interior values. Lie runs bulk then boundary over the full step; Strang
/// runs bulk (tau/2), boundary (tau), bulk (tau/2). Nonlinearities are
/// explicit: Euler substeps evaluate them at the state entering the
/// substep, Crank-Nicolson substeps use the left/right rectangle rule.
///
/// The problem must outlive the splitting object.
class KineticSplitting {
 public:
  KineticSplitting(const KineticProblem& prob, Splitting splitting, Substepper substepper, double tau,
                   LinearSolveOptions opts = {})
      : prob_(&prob), splitting_(splitting), substepper_(substepper), tau_(tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("KineticSplitting: tau must be positive");
    const auto& b = prob.blocks;
    const double bulk_step = splitting == Splitting::Lie ? tau : 0.5 * tau;
    const auto bulk_sys = undamped_system(b.M11, b.A11);
    const auto surf_sys = undamped_system(b.M_surf, b.A_surf);
    if (substepper == Substepper::Euler) {
      bulk_euler_.emplace(bulk_sys, bulk_step, opts);
      surf_euler_.emplace(surf_sys, tau, opts);
    } else {
      bulk_cn_.emplace(bulk_sys, bulk_step, opts);
      surf_cn_.emplace(surf_sys, tau, opts);
    }
  }

  double tau() const { return tau_; }

  KineticState step(const KineticState& s) const {
    return splitting_ == Splitting::Lie ? lie(s) : strang(s);
  }

 private:
  struct BulkLoad {
    Vector f1;
    Vector f2;
  };

  BulkLoad bulk_load(double t, const Vector& u1, const Vector& u2) const {
    const Vector f = prob_->bulk_load(t, concat(u1, u2));
    return {f.head(prob_->n_interior()), f.tail(prob_->n_surf())};
  }

  /// Load contribution of the frozen boundary data on the interior equations.
  Vector dirichlet_part(const Vector& pdd, const Vector& p) const {
    const auto& b = prob_->blocks;
    return -(b.M12 * pdd) - b.A12 * p;
  }

  /// Load contribution of the bulk on the boundary equations.
  Vector coupling_part(const Vector& pdd, const Vector& p, const Vector& u1_dd, const Vector& u1) const {
    const auto& b = prob_->blocks;
    return -(b.M22 * pdd) - b.A22 * p - b.M21 * u1_dd - b.A21 * u1;
  }

  static KineticState finish(const KineticState& s, StepState bulk, StepState surf, double tau) {
    KineticState next;
    next.u1 = std::move(bulk.u);
    next.w1 = std::move(bulk.w);
    next.pdd = (surf.w - s.r) / tau;
    next.p = std::move(surf.u);
    next.r = std::move(surf.w);
    next.u2 = next.p;
    next.w2 = next.r;
    next.t = s.t + tau;
    return next;
  }

  KineticState lie(const KineticState& s) const {
    const double t0 = s.t;
    const double t1 = s.t + tau_;
    const Vector c_bulk = dirichlet_part(s.pdd, s.p);
    StepState bulk;
    StepState surf;
    if (substepper_ == Substepper::Euler) {
      // f^{n+1} = f(t^{n+1}, u^n) for both the interior and the trace rows
      const BulkLoad f = bulk_load(t1, s.u1, s.p);
      bulk = bulk_euler_->step({s.u1, s.w1, t0}, f.f1 + c_bulk);
      const Vector u1_dd = (bulk.w - s.w1) / tau_;
      const Vector g = prob_->surface_load(t1, s.p) + f.f2 + coupling_part(s.pdd, s.p, u1_dd, bulk.u);
      surf = surf_euler_->step({s.p, s.r, t0}, g);
    } else {
      const BulkLoad f0 = bulk_load(t0, s.u1, s.p);
      bulk = bulk_cn_->step({s.u1, s.w1, t0}, f0.f1 + c_bulk,
                            [&](const Vector& u1_new) { return Vector(bulk_load(t1, u1_new, s.p).f1 + c_bulk); });
      const Vector u1_dd = (bulk.w - s.w1) / tau_;
      const Vector h = coupling_part(s.pdd, s.p, u1_dd, bulk.u);
      surf = surf_cn_->step({s.p, s.r, t0}, prob_->surface_load(t0, s.p) + f0.f2 + h, [&](const Vector& p_new) {
        return Vector(prob_->surface_load(t1, p_new) + bulk_load(t1, bulk.u, p_new).f2 + h);
      });
    }
    return finish(s, std::move(bulk), std::move(surf), tau_);
  }

  KineticState strang(const KineticState& s) const {
    const double t0 = s.t;
    const double t_half = s.t + 0.5 * tau_;
    const double t1 = s.t + tau_;
    const Vector c0 = dirichlet_part(s.pdd, s.p);
    StepState half;
    StepState surf;
    StepState bulk;
    if (substepper_ == Substepper::Euler) {
      half = bulk_euler_->step({s.u1, s.w1, t0}, bulk_load(t_half, s.u1, s.p).f1 + c0);
      const Vector u1_dd = (half.w - s.w1) / (0.5 * tau_);
      const Vector g = prob_->surface_load(t1, s.p) + bulk_load(t1, half.u, s.p).f2 +
                       coupling_part(s.pdd, s.p, u1_dd, half.u);
      surf = surf_euler_->step({s.p, s.r, t0}, g);
      const Vector pdd_new = (surf.w - s.r) / tau_;
      const Vector c1 = dirichlet_part(pdd_new, surf.u);
      bulk = bulk_euler_->step(half, bulk_load(t1, half.u, surf.u).f1 + c1);
    } else {
      const BulkLoad f0 = bulk_load(t0, s.u1, s.p);
      Vector f1_half;  // f1^{n+1/2}: updated u1, still the old trace p^n
      half = bulk_cn_->step({s.u1, s.w1, t0}, f0.f1 + c0, [&](const Vector& u1_new) {
        f1_half = bulk_load(t_half, u1_new, s.p).f1;
        return Vector(f1_half + c0);
      });
      const Vector u1_dd = (half.w - s.w1) / (0.5 * tau_);
      const Vector h = coupling_part(s.pdd, s.p, u1_dd, half.u);
      surf = surf_cn_->step({s.p, s.r, t0}, prob_->surface_load(t0, s.p) + f0.f2 + h, [&](const Vector& p_new) {
        return Vector(prob_->surface_load(t1, p_new) + bulk_load(t1, half.u, p_new).f2 + h);
      });
      const Vector pdd_new = (surf.w - s.r) / tau_;
      const Vector c1 = dirichlet_part(pdd_new, surf.u);
      bulk = bulk_cn_->step(half, f1_half + c1, [&](const Vector& u1_new) {
        return Vector(bulk_load(t1, u1_new, surf.u).f1 + c1);
      });
    }
    return finish(s, std::move(bulk), std::move(surf), tau_);
  }

  const KineticProblem* prob_;
  Splitting splitting_;
  Substepper substepper_;
  double tau_;
  std::optional<ImplicitEulerStepper> bulk_euler_;
  std::optional<ImplicitEulerStepper> surf_euler_;
  std::optional<CrankNicolsonStepper> bulk_cn_;
  std::optional<CrankNicolsonStepper> surf_cn_;
};

inline KineticState lie_step(const KineticProblem& prob, const KineticState& s, double tau, Substepper sub) {
  return KineticSplitting(prob, Splitting::Lie, sub, tau).step(s);
}

inline KineticState strang_step(const KineticProblem& prob, const KineticState& s, double tau, Substepper sub) {
  return KineticSplitting(prob, Splitting::Strang, sub, tau).step(s);
}

/// Runs a splitting scheme to the final time, sampling every step.
inline Trajectory run_kinetic_splitting(const KineticProblem& prob, const KineticState& init, Splitting splitting,
                                        Substepper sub, double tau, LinearSolveOptions opts = {}) {
  const std::size_t n_steps = step_count(prob.final_time, tau, "run_kinetic_splitting");
  const KineticSplitting scheme(prob, splitting, sub, tau, opts);
  Trajectory traj;
  traj.sample_dt = tau;
  KineticState s = init;
  traj.push(s.t, s.u(), s.p, energy_kinetic(prob, s));
  for (std::size_t n = 0; n < n_steps; ++n) {
    s = scheme.step(s);
    if (s.u2 != s.p || s.w2 != s.r) ++traj.constraint_violations;
    traj.push(s.t, s.u(), s.p, energy_kinetic(prob, s));
  }
  return traj;
}

/// The constraint eliminated (p := u2): mass M_bulk + embed(M_surf),
/// stiffness A_bulk + embed(A_surf).
inline SecondOrderSystem kinetic_monolithic_system(const KineticProblem& prob) {
  const auto& b = prob.blocks;
  return undamped_system(add_scaled(b.M_bulk, embed_trailing(b.M_surf, b.n_bulk), 1.0, 1.0),
                         add_scaled(b.A_bulk, embed_trailing(b.A_surf, b.n_bulk), 1.0, 1.0));
}

/// Monolithic IMEX Crank-Nicolson reference on the eliminated system,
/// sampled at every multiple of sample_dt.
inline Trajectory kinetic_reference_solve(const KineticProblem& prob, const Vector& u0, const Vector& w0,
                                          double tau_ref, double sample_dt, LinearSolveOptions opts = {}) {
  const auto& b = prob.blocks;
  require_dims(u0.size() == b.n_bulk && w0.size() == b.n_bulk, "kinetic_reference_solve");
  const std::size_t n_steps = step_count(prob.final_time, tau_ref, "kinetic_reference_solve");
  const std::size_t stride = step_count(sample_dt, tau_ref, "kinetic_reference_solve sampling");
  if (n_steps % stride != 0) throw std::invalid_argument("kinetic_reference_solve: sampling grid misses final time");

  const auto sys = kinetic_monolithic_system(prob);
  const CrankNicolsonStepper stepper(sys, tau_ref, opts);
  auto load = [&](double t, const Vector& u) {
    Vector f = prob.bulk_load(t, u);
    f.tail(b.n_surf) += prob.surface_load(t, u.tail(b.n_surf));
    return f;
  };

  Trajectory traj;
  traj.sample_dt = sample_dt;
  StepState s{u0, w0, 0.0};
  auto record = [&] {
    traj.push(s.t, s.u, s.u.tail(b.n_surf), quadratic_energy(sys.mass, sys.stiffness, s.u, s.w));
  };
  record();
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t_next = static_cast<double>(n) * tau_ref;
    s = stepper.step(s, load(s.t, s.u), [&](const Vector& u_new) { return load(t_next, u_new); });
    s.t = t_next;
    if (n % stride == 0) record();
  }
  return traj;
}

}  // namespace dynbc
