#pragma once

#include <functional>
#include <stdexcept>

#include "dynbc/linalg.hpp"

namespace dynbc {

/// M u'' + D u' + A u = f with constant matrices. D may be empty (zero) or skew.
struct SecondOrderSystem {
  SparseMatrix mass;
  SparseMatrix damping;
  SparseMatrix stiffness;

  Index size() const { return mass.rows(); }
  bool has_damping() const { return damping.nonZeros() > 0; }

  void validate() const {
    const Index n = size();
    require_dims(mass.cols() == n && stiffness.rows() == n && stiffness.cols() == n, "SecondOrderSystem");
    require_dims(damping.size() == 0 || (damping.rows() == n && damping.cols() == n), "SecondOrderSystem damping");
  }
};

inline SecondOrderSystem undamped_system(SparseMatrix mass, SparseMatrix stiffness) {
  SecondOrderSystem sys;
  sys.damping = SparseMatrix(mass.rows(), mass.cols());
  sys.mass = std::move(mass);
  sys.stiffness = std::move(stiffness);
  return sys;
}

/// Position u, velocity w = u', time t.
struct StepState {
  Vector u;
  Vector w;
  double t = 0.0;
};

/// Load evaluated on the freshly updated position.
using LoadFunction = std::function<Vector(const Vector& u_new)>;

namespace detail {

inline SparseMatrix system_matrix(const SecondOrderSystem& sys, double c_damping, double c_stiffness) {
  SparseMatrix m = add_scaled(sys.mass, sys.stiffness, 1.0, c_stiffness);
  if (sys.has_damping()) m = add_scaled(m, sys.damping, 1.0, c_damping);
  return m;
}

inline void check_step(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
}

}  // namespace detail

/// Implicit Euler on the first-order form; the system matrix
/// M + tau D + tau^2 A is factored once.
class ImplicitEulerStepper {
 public:
  ImplicitEulerStepper(const SecondOrderSystem& sys, double tau, LinearSolveOptions opts = {})
      : mass_((sys.validate(), detail::check_step(tau), sys.mass)),
        stiffness_(sys.stiffness),
        tau_(tau),
        solver_(detail::system_matrix(sys, tau, tau * tau), !sys.has_damping(), opts) {}

  double tau() const { return tau_; }

  /// (M + tau D + tau^2 A) w+ = M w - tau A u + tau f,   u+ = u + tau w+.
  StepState step(const StepState& s, const Vector& load) const {
    require_dims(s.u.size() == mass_.rows() && s.w.size() == mass_.rows() && load.size() == mass_.rows(),
                 "ImplicitEulerStepper::step");
    const Vector rhs = mass_ * s.w - tau_ * (stiffness_ * s.u) + tau_ * load;
    StepState next;
    next.w = solver_.solve(rhs);
    next.u = s.u + tau_ * next.w;
    next.t = s.t + tau_;
    return next;
  }

 private:
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  double tau_;
  FactoredMatrix solver_;
};

/// Three-stage implicit-explicit Crank-Nicolson: left rectangle rule for the
/// load in the implicit stage, correction with f(t+tau, u+) afterwards.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const SecondOrderSystem& sys, double tau, LinearSolveOptions opts = {})
      : mass_((sys.validate(), detail::check_step(tau), sys.mass)),
        stiffness_(sys.stiffness),
        tau_(tau),
        solver_(detail::system_matrix(sys, 0.5 * tau, 0.25 * tau * tau), !sys.has_damping(), opts),
        mass_solver_(sys.mass, true, opts) {}

  double tau() const { return tau_; }

  /// (M + tau/2 D + tau^2/4 A) w* = M w - tau/2 A u + tau/2 f_left
  /// u+ = u + tau w*
  /// M w+ = 2 M w* - M w + tau/2 (f_right(u+) - f_left)
  StepState step(const StepState& s, const Vector& load_left, const LoadFunction& load_right) const {
    require_dims(s.u.size() == mass_.rows() && s.w.size() == mass_.rows() && load_left.size() == mass_.rows(),
                 "CrankNicolsonStepper::step");
    const Vector rhs = mass_ * s.w - 0.5 * tau_ * (stiffness_ * s.u) + 0.5 * tau_ * load_left;
    const Vector w_mid = solver_.solve(rhs);
    StepState next;
    next.u = s.u + tau_ * w_mid;
    next.t = s.t + tau_;
    next.w = 2.0 * w_mid - s.w;
    const Vector load_new = load_right(next.u);
    require_dims(load_new.size() == mass_.rows(), "CrankNicolsonStepper load");
    const Vector jump = load_new - load_left;
    if (jump.cwiseAbs().maxCoeff() > 0.0) next.w += mass_solver_.solve(0.5 * tau_ * jump);
    return next;
  }

 private:
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  double tau_;
  FactoredMatrix solver_;
  FactoredMatrix mass_solver_;
};

/// One implicit Euler step; f_eval is f^{n+1} (explicit in the state).
inline StepState implicit_euler_step(const SecondOrderSystem& sys, const StepState& s, double tau,
                                     const Vector& f_eval) {
  return ImplicitEulerStepper(sys, tau).step(s, f_eval);
}

/// One IMEX Crank-Nicolson step; f_left = f(t^n, u^n), f_right_eval maps u^{n+1} to f^{n+1}.
inline StepState cn_imex_step(const SecondOrderSystem& sys, const StepState& s, double tau, const Vector& f_left,
                              const LoadFunction& f_right_eval) {
  return CrankNicolsonStepper(sys, tau).step(s, f_left, f_right_eval);
}

/// 1/2 (w^T M w + u^T A u).
inline double quadratic_energy(const SparseMatrix& mass, const SparseMatrix& stiffness, const Vector& u,
                               const Vector& w) {
  return 0.5 * (w.dot(mass * w) + u.dot(stiffness * u));
}

}  // namespace dynbc
