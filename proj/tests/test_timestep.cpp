#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dynbc/norms.hpp"
#include "dynbc/timestep.hpp"

using namespace dynbc;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& d) {
  SparseMatrix s = d.sparseView();
  s.makeCompressed();
  return s;
}

SecondOrderSystem scalar_oscillator() {
  return undamped_system(sparse_identity(1), sparse_identity(1));
}

Vector scalar(double v) { return Vector::Constant(1, v); }

// Global error |u_N - cos(1)| + |w_N + sin(1)| for u'' + u = 0 on [0, 1].
double oscillator_error(bool crank_nicolson, int exponent) {
  const double tau = std::ldexp(1.0, -exponent);
  const auto sys = scalar_oscillator();
  StepState s{scalar(1.0), scalar(0.0), 0.0};
  const ImplicitEulerStepper ie(sys, tau);
  const CrankNicolsonStepper cn(sys, tau);
  for (int n = 0; n < (1 << exponent); ++n) {
    s = crank_nicolson ? cn.step(s, scalar(0.0), [](const Vector&) { return scalar(0.0); })
                       : ie.step(s, scalar(0.0));
  }
  return std::abs(s.u[0] - std::cos(1.0)) + std::abs(s.w[0] + std::sin(1.0));
}

double fitted_order(bool crank_nicolson) {
  std::vector<double> taus;
  std::vector<double> errs;
  for (int k = 4; k <= 10; ++k) {
    taus.push_back(std::ldexp(1.0, -k));
    errs.push_back(oscillator_error(crank_nicolson, k));
  }
  return fit_orders(taus, errs).least_squares;
}

// 2-dof system with M = diag(1, 2), A = [[2, -1], [-1, 3]], D = [[0, -1], [1, 0]].
SecondOrderSystem skew_two_dof() {
  Eigen::MatrixXd m(2, 2), a(2, 2), d(2, 2);
  m << 1, 0, 0, 2;
  a << 2, -1, -1, 3;
  d << 0, -1, 1, 0;
  return {from_dense(m), from_dense(d), from_dense(a)};
}

}  // namespace

TEST(ImplicitEuler, FreeDrift) {
  const auto sys = undamped_system(sparse_identity(2), SparseMatrix(2, 2));
  const StepState s{Vector::Ones(2), (Vector(2) << 0.5, -1.0).finished(), 0.0};
  const StepState n = implicit_euler_step(sys, s, 0.1, Vector::Zero(2));
  EXPECT_LE((n.w - s.w).norm(), 1e-15);
  EXPECT_LE((n.u - (s.u + 0.1 * s.w)).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(n.t, 0.1);
}

TEST(ImplicitEuler, HandComputedOscillatorStep) {
  const StepState n = implicit_euler_step(scalar_oscillator(), {scalar(1.0), scalar(0.0), 0.0}, 0.1, scalar(0.0));
  EXPECT_NEAR(n.w[0], -0.1 / 1.01, 1e-15);
  EXPECT_NEAR(n.u[0], 1.0 - 0.01 / 1.01, 1e-15);
}

TEST(ImplicitEuler, FirstOrderOnOscillator) {
  EXPECT_NEAR(fitted_order(false), 1.0, 0.1);
}

TEST(ImplicitEuler, DissipatesLinearEnergy) {
  Eigen::MatrixXd m(2, 2), a(2, 2);
  m << 2, 1, 1, 2;
  a << 3, -1, -1, 1;
  const auto sys = undamped_system(from_dense(m), from_dense(a));
  const ImplicitEulerStepper ie(sys, 0.05);
  StepState s{(Vector(2) << 1.0, -0.5).finished(), (Vector(2) << 0.3, 0.2).finished(), 0.0};
  double e = quadratic_energy(sys.mass, sys.stiffness, s.u, s.w);
  for (int n = 0; n < 200; ++n) {
    s = ie.step(s, Vector::Zero(2));
    const double e_next = quadratic_energy(sys.mass, sys.stiffness, s.u, s.w);
    ASSERT_LE(e_next, e + 1e-12);
    e = e_next;
  }
}

TEST(ImplicitEuler, DampedSystemAgainstDenseFormula) {
  const auto sys = skew_two_dof();
  const double tau = 0.2;
  const StepState s{(Vector(2) << 1.0, 0.5).finished(), (Vector(2) << -0.2, 0.4).finished(), 0.0};
  const Vector f = (Vector(2) << 0.1, -0.3).finished();
  const StepState n = implicit_euler_step(sys, s, tau, f);
  const Eigen::MatrixXd m(sys.mass), d(sys.damping), a(sys.stiffness);
  const Vector w = (m + tau * d + tau * tau * a).lu().solve(m * s.w - tau * a * s.u + tau * f);
  EXPECT_LE((n.w - w).norm(), 1e-14);
  EXPECT_LE((n.u - (s.u + tau * w)).norm(), 1e-14);
}

TEST(CrankNicolson, FreeDrift) {
  const auto sys = undamped_system(sparse_identity(2), SparseMatrix(2, 2));
  const StepState s{Vector::Ones(2), (Vector(2) << 0.5, -1.0).finished(), 0.0};
  const StepState n = cn_imex_step(sys, s, 0.1, Vector::Zero(2), [](const Vector&) { return Vector(Vector::Zero(2)); });
  EXPECT_LE((n.w - s.w).norm(), 1e-15);
  EXPECT_LE((n.u - (s.u + 0.1 * s.w)).norm(), 1e-15);
}

TEST(CrankNicolson, SecondOrderOnOscillator) {
  EXPECT_NEAR(fitted_order(true), 2.0, 0.1);
}

TEST(CrankNicolson, SkewSystemConservesEnergy) {
  const auto sys = skew_two_dof();
  const double tau = 0.01;
  const CrankNicolsonStepper cn(sys, tau);
  StepState s{(Vector(2) << 1.0, -0.5).finished(), (Vector(2) << 0.3, 0.7).finished(), 0.0};
  const double e0 = quadratic_energy(sys.mass, sys.stiffness, s.u, s.w);
  for (int n = 0; n < 100; ++n) {
    s = cn.step(s, Vector::Zero(2), [](const Vector&) { return Vector(Vector::Zero(2)); });
  }
  EXPECT_LE(std::abs(quadratic_energy(sys.mass, sys.stiffness, s.u, s.w) - e0), 1e-12);
}

TEST(CrankNicolson, MatchesTrapezoidalRuleForConstantLoad) {
  // classical trapezoidal rule on y' = F y + g with y = (u, w)
  Eigen::MatrixXd m(2, 2), a(2, 2);
  m << 2, 1, 1, 2;
  a << 3, -1, -1, 1;
  const auto sys = undamped_system(from_dense(m), from_dense(a));
  const Vector f = (Vector(2) << 0.4, -0.1).finished();
  const double tau = 0.05;
  const CrankNicolsonStepper cn(sys, tau);
  StepState s{(Vector(2) << 1.0, 0.0).finished(), (Vector(2) << 0.0, 1.0).finished(), 0.0};

  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(4, 4);
  big.topRightCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
  big.bottomLeftCorner(2, 2) = -m.inverse() * a;
  Vector g = Vector::Zero(4);
  g.tail(2) = m.inverse() * f;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  Vector y(4);
  y << s.u, s.w;
  for (int n = 0; n < 40; ++n) {
    s = cn.step(s, f, [&](const Vector&) { return f; });
    y = (id - 0.5 * tau * big).lu().solve((id + 0.5 * tau * big) * y + tau * g);
  }
  EXPECT_LE((s.u - y.head(2)).norm(), 1e-12);
  EXPECT_LE((s.w - y.tail(2)).norm(), 1e-12);
}

TEST(CrankNicolson, RightLoadSeesUpdatedPosition) {
  const auto sys = scalar_oscillator();
  double seen = 0.0;
  const StepState n = cn_imex_step(sys, {scalar(1.0), scalar(2.0), 0.0}, 0.1, scalar(0.0), [&](const Vector& u) {
    seen = u[0];
    return scalar(0.0);
  });
  EXPECT_DOUBLE_EQ(seen, n.u[0]);
}

TEST(Steppers, TimeTranslationInvariant) {
  const auto sys = skew_two_dof();
  const double tau = 0.125;
  const CrankNicolsonStepper cn(sys, tau);
  auto load = [](double t, const Vector& u) { return Vector((Vector(2) << std::sin(t), u[0] * u[1]).finished()); };
  auto run = [&](double t0) {
    StepState s{(Vector(2) << 1.0, 0.2).finished(), (Vector(2) << 0.0, 0.1).finished(), t0};
    for (int n = 0; n < 10; ++n) {
      const double t1 = s.t + tau;
      s = cn.step(s, load(s.t - t0, s.u), [&](const Vector& u) { return load(t1 - t0, u); });
    }
    return s;
  };
  const StepState a = run(0.0);
  const StepState b = run(4.0);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.w, b.w);
}

TEST(Steppers, RejectBadInput) {
  EXPECT_THROW(ImplicitEulerStepper(scalar_oscillator(), 0.0), std::invalid_argument);
  EXPECT_THROW(CrankNicolsonStepper(scalar_oscillator(), -1.0), std::invalid_argument);
  const ImplicitEulerStepper ie(scalar_oscillator(), 0.1);
  EXPECT_THROW(ie.step({Vector::Ones(2), Vector::Ones(2), 0.0}, Vector::Ones(2)), DimensionError);
}

TEST(Energy, QuadraticForm) {
  Eigen::MatrixXd m(2, 2), a(2, 2);
  m << 2, 1, 1, 2;
  a << 3, -1, -1, 1;
  const Vector u = (Vector(2) << 1.0, 2.0).finished();
  const Vector w = (Vector(2) << -1.0, 0.5).finished();
  EXPECT_NEAR(quadratic_energy(from_dense(m), from_dense(a), u, w), 0.5 * (w.dot(m * w) + u.dot(a * u)), 1e-15);
}
