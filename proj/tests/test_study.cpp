#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "dynbc/study.hpp"

using namespace dynbc;

namespace {

StudyConfig small_kinetic() {
  StudyConfig cfg = default_config(ProblemKind::Kinetic);
  cfg.h_targets = {0.3};
  cfg.tau_list = powers_of_two(-3, -5);
  cfg.tau_ref = std::ldexp(1.0, -7);
  cfg.final_time = 0.5;
  return cfg;
}

std::string csv_bytes(const StudyResult& r) {
  std::ostringstream os;
  write_errors_csv(os, r);
  write_orders_csv(os, r);
  write_energy_csv(os, r);
  write_plot_script(os, r);
  return os.str();
}

}  // namespace

TEST(Config, ParseRealAcceptsPowersOfTwo) {
  EXPECT_EQ(parse_real("2^-4"), 0.0625);
  EXPECT_EQ(parse_real(" 0.5 "), 0.5);
  EXPECT_EQ(parse_real("2^10"), 1024.0);
  EXPECT_THROW(parse_real("abc"), std::invalid_argument);
  EXPECT_THROW(parse_real("1.0x"), std::invalid_argument);
  EXPECT_EQ(parse_real_list("2^-4, 2^-5,2^-6"), (std::vector<double>{0.0625, 0.03125, 0.015625}));
}

TEST(Config, DefaultsPerProblem) {
  const StudyConfig k = default_config(ProblemKind::Kinetic);
  EXPECT_EQ(k.schemes.size(), 4u);
  EXPECT_EQ(k.tau_list.front(), 0.0625);
  EXPECT_EQ(k.tau_list.back(), std::ldexp(1.0, -9));
  EXPECT_EQ(k.tau_ref, std::ldexp(1.0, -11));
  EXPECT_EQ(k.h_targets, std::vector<double>{0.09});
  EXPECT_NO_THROW(k.validate());
  const StudyConfig a = default_config(ProblemKind::Acoustic);
  EXPECT_EQ(a.nonlinearity, Nonlinearity::AllenCahnSurface);
  EXPECT_NO_THROW(a.validate());
}

TEST(Config, ReadKeyValueFile) {
  std::istringstream in(
      "# acoustic run\n"
      "problem = acoustic\n"
      "scheme = strang-cn\n"
      "tau_list = 2^-3, 2^-4, 2^-5\n"
      "tau_ref = 2^-8   # fine\n"
      "h = 0.2, 0.1\n"
      "norms = L2L2\n"
      "\n");
  const StudyConfig cfg = read_config(in);
  EXPECT_EQ(cfg.problem, ProblemKind::Acoustic);
  EXPECT_EQ(cfg.schemes, std::vector<Scheme>{Scheme::StrangCN});
  EXPECT_EQ(cfg.tau_list.size(), 3u);
  EXPECT_EQ(cfg.tau_ref, std::ldexp(1.0, -8));
  EXPECT_EQ(cfg.h_targets, (std::vector<double>{0.2, 0.1}));
  EXPECT_EQ(cfg.norms, std::vector<Norm>{Norm::L2L2});
  EXPECT_EQ(cfg.nonlinearity, Nonlinearity::AllenCahnSurface);
}

TEST(Config, LargeScalePresetThenExplicitKeys) {
  std::istringstream in("tau_ref = 2^-13\npaper_scale = yes\n");
  const StudyConfig cfg = read_config(in);
  EXPECT_EQ(cfg.h_targets, std::vector<double>{0.02});
  EXPECT_EQ(cfg.tau_ref, std::ldexp(1.0, -13));
  EXPECT_EQ(cfg.tau_list.back(), std::ldexp(1.0, -10));
}

TEST(Config, LaterSettingsOverride) {
  StudyConfig cfg = default_config(ProblemKind::Kinetic);
  apply_setting(cfg, "beta", "2");
  apply_setting(cfg, "beta", "3.5");
  EXPECT_EQ(cfg.beta, 3.5);
}

TEST(Config, Rejections) {
  StudyConfig cfg = default_config(ProblemKind::Kinetic);
  EXPECT_THROW(apply_setting(cfg, "colour", "red"), std::invalid_argument);
  EXPECT_THROW(apply_setting(cfg, "scheme", "leapfrog"), std::invalid_argument);
  std::istringstream bad("tau_ref 2^-4\n");
  EXPECT_THROW(read_config(bad), std::invalid_argument);

  auto invalid = [](auto mutate) {
    StudyConfig c = default_config(ProblemKind::Kinetic);
    mutate(c);
    return c;
  };
  EXPECT_THROW(invalid([](StudyConfig& c) { c.tau_ref = std::ldexp(1.0, -10); }).validate(), std::invalid_argument);
  EXPECT_NO_THROW(invalid([](StudyConfig& c) {
                    c.schemes = {Scheme::ReferenceCN};
                    c.tau_ref = std::ldexp(1.0, -9);
                  }).validate());
  EXPECT_THROW(invalid([](StudyConfig& c) { c.tau_list = {0.3}; }).validate(), std::invalid_argument);
  EXPECT_THROW(invalid([](StudyConfig& c) { c.h_targets = {1.5}; }).validate(), std::invalid_argument);
  EXPECT_THROW(invalid([](StudyConfig& c) { c.final_time = 0.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(invalid([](StudyConfig& c) { c.kappa = -1.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(invalid([](StudyConfig& c) {
                 c.problem = ProblemKind::Acoustic;
                 c.schemes = {Scheme::LieCN};
               }).validate(),
               std::invalid_argument);
}

TEST(FitOrders, ExactPowerLaws) {
  const std::vector<double> taus = powers_of_two(-2, -6);
  std::vector<double> first;
  std::vector<double> second;
  for (const double t : taus) {
    first.push_back(3.0 * t);
    second.push_back(0.5 * t * t);
  }
  const auto o1 = fit_orders(taus, first);
  const auto o2 = fit_orders(taus, second);
  EXPECT_NEAR(o1.averaged, 1.0, 1e-12);
  EXPECT_NEAR(o1.least_squares, 1.0, 1e-12);
  EXPECT_NEAR(o2.averaged, 2.0, 1e-12);
  EXPECT_NEAR(o2.least_squares, 2.0, 1e-12);
  ASSERT_EQ(o2.pairwise.size(), 4u);
}

TEST(FitOrders, UnsortedInputAndMixedRates) {
  // pairwise orders 1 and 4
  const auto o = fit_orders({0.25, 1.0, 0.5}, {1.0 / 32.0, 1.0, 0.5});
  ASSERT_EQ(o.pairwise.size(), 2u);
  EXPECT_NEAR(o.pairwise[0], 1.0, 1e-14);
  EXPECT_NEAR(o.pairwise[1], 4.0, 1e-14);
  EXPECT_NEAR(o.averaged, 2.5, 1e-14);
  EXPECT_NEAR(o.least_squares, 2.5, 1e-14);
}

TEST(FitOrders, StrangErrorsUnderHalving) {
  const auto o = fit_orders({0.015625, 0.0078125, 0.00390625}, {0.065502609, 0.016770439, 0.0043791645});
  EXPECT_NEAR(o.pairwise[0], 1.97, 0.005);
}

TEST(FitOrders, Rejections) {
  EXPECT_THROW(fit_orders({0.5, 0.25}, {1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(fit_orders({0.5, 0.25, 0.125}, {1.0, 0.0, 0.1}), std::invalid_argument);
  EXPECT_THROW(fit_orders({0.5, 0.25, 0.125}, {1.0, NAN, 0.1}), std::invalid_argument);
  EXPECT_THROW(fit_orders({0.5, 0.5, 0.125}, {1.0, 0.5, 0.1}), std::invalid_argument);
  EXPECT_THROW(fit_orders({0.5, 0.25, 0.125}, {1.0, 0.5}), std::invalid_argument);
}

TEST(ErrorNorms, IdenticalTrajectoriesGiveZero) {
  const auto sys = assemble_block_system(generate_disc_mesh(0.3), {}, CouplingKind::Kinetic);
  const std::vector<Vector> traj(5, Vector::Ones(sys.n_bulk));
  const ErrorNorms e = error_norms(traj, traj, 1, 0.25, sys.M_bulk, sys.A_bulk);
  for (const Norm n : {Norm::LinfL2, Norm::LinfH1, Norm::L2L2, Norm::L2H1}) EXPECT_EQ(e.get(n), 0.0);
}

TEST(ErrorNorms, ConstantUnitError) {
  const Mesh mesh = generate_disc_mesh(0.2);
  const auto sys = assemble_block_system(mesh, {}, CouplingKind::Kinetic);
  const Index n = sys.n_bulk;
  const double area = total_area(mesh);
  std::vector<Vector> ref(9, Vector::Zero(n));
  std::vector<Vector> samples(5, Vector::Ones(n));
  const ErrorNorms e = error_norms(samples, ref, 2, 0.25, sys.M_bulk, sys.A_bulk);
  EXPECT_NEAR(e.linf_l2, std::sqrt(area), 1e-12);
  EXPECT_NEAR(e.linf_h1, std::sqrt(area), 1e-12);
  // four left-rectangle intervals of length 1/4 cover T = 1
  EXPECT_NEAR(e.l2_l2, std::sqrt(area), 1e-12);
  EXPECT_NEAR(e.l2_h1, std::sqrt(area), 1e-12);
}

TEST(ErrorNorms, DenseOracleOnStridedGrid) {
  const auto sys = assemble_block_system(generate_disc_mesh(0.3), {}, CouplingKind::Acoustic);
  const Eigen::MatrixXd m(sys.M_bulk);
  const Eigen::MatrixXd a(sys.A_bulk);
  const Index n = sys.n_bulk;
  std::vector<Vector> ref;
  std::vector<Vector> samples;
  for (int k = 0; k <= 12; ++k) ref.push_back(Vector::LinSpaced(n, 0.0, 1.0) * std::sin(0.3 * k));
  for (int k = 0; k <= 4; ++k) samples.push_back(ref[3 * k] + Vector::LinSpaced(n, -1.0, 2.0) * (0.1 * k * k));
  const double dt = 0.25;
  double linf_l2 = 0.0;
  double linf_h1 = 0.0;
  double sum_l2 = 0.0;
  double sum_h1 = 0.0;
  for (int k = 0; k <= 4; ++k) {
    const Vector e = samples[k] - ref[3 * k];
    const double l2 = e.dot(m * e);
    const double h1 = l2 + e.dot(a * e);
    linf_l2 = std::max(linf_l2, std::sqrt(l2));
    linf_h1 = std::max(linf_h1, std::sqrt(h1));
    if (k < 4) {
      sum_l2 += dt * l2;
      sum_h1 += dt * h1;
    }
  }
  const ErrorNorms e = error_norms(samples, ref, 3, dt, sys.M_bulk, sys.A_bulk);
  EXPECT_NEAR(e.linf_l2, linf_l2, 1e-12);
  EXPECT_NEAR(e.linf_h1, linf_h1, 1e-12);
  EXPECT_NEAR(e.l2_l2, std::sqrt(sum_l2), 1e-12);
  EXPECT_NEAR(e.l2_h1, std::sqrt(sum_h1), 1e-12);
}

TEST(ErrorNorms, GridMismatch) {
  const auto sys = assemble_block_system(generate_disc_mesh(0.3), {}, CouplingKind::Kinetic);
  const std::vector<Vector> ref(4, Vector::Zero(sys.n_bulk));
  const std::vector<Vector> samples(3, Vector::Zero(sys.n_bulk));
  EXPECT_THROW(error_norms(samples, ref, 2, 0.1, sys.M_bulk, sys.A_bulk), std::invalid_argument);
  EXPECT_THROW(error_norms({}, ref, 1, 0.1, sys.M_bulk, sys.A_bulk), std::invalid_argument);
}

TEST(Study, ReferenceAgainstItselfHasZeroError) {
  StudyConfig cfg = small_kinetic();
  cfg.schemes = {Scheme::ReferenceCN};
  cfg.tau_list = {cfg.tau_ref};
  cfg.check_reference = false;
  const StudyResult r = run_study(cfg);
  ASSERT_FALSE(r.errors.empty());
  for (const auto& e : r.errors) EXPECT_EQ(e.error, 0.0);
  EXPECT_TRUE(r.failures.empty());
}

TEST(Study, ResultShape) {
  const StudyConfig cfg = small_kinetic();
  const StudyResult r = run_study(cfg);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.constraint_violations, 0u);
  // schemes x taus x variables x norms
  EXPECT_EQ(r.errors.size(), 4u * 3u * 2u * 4u);
  EXPECT_EQ(r.orders.size(), 4u * 2u * 4u);
  EXPECT_EQ(r.reference_checks.size(), 2u);
  ASSERT_NE(r.order(Scheme::StrangCN, 0.3, "p", Norm::L2L2), nullptr);
  EXPECT_TRUE(std::isnan(r.error(Scheme::LieEuler, 0.3, 0.01, "u", Norm::L2L2)));
  EXPECT_GT(r.error(Scheme::LieEuler, 0.3, 0.125, "u", Norm::L2L2), 0.0);
}

TEST(Study, CsvBytesReproducible) {
  StudyConfig cfg = small_kinetic();
  cfg.nonlinearity = Nonlinearity::AllenCahnBulk;
  EXPECT_EQ(csv_bytes(run_study(cfg)), csv_bytes(run_study(cfg)));
}

TEST(Study, CsvHeaders) {
  StudyConfig cfg = small_kinetic();
  cfg.schemes = {Scheme::LieEuler};
  const StudyResult r = run_study(cfg);
  std::ostringstream errors, orders, energy;
  write_errors_csv(errors, r);
  write_orders_csv(orders, r);
  write_energy_csv(energy, r);
  EXPECT_EQ(errors.str().substr(0, errors.str().find('\n')), "scheme,h_target,h,tau,variable,norm,error");
  EXPECT_EQ(orders.str().substr(0, orders.str().find('\n')),
            "scheme,h_target,variable,norm,averaged_order,lsq_order,pairwise_orders");
  EXPECT_EQ(energy.str().substr(0, energy.str().find('\n')), "scheme,h_target,tau,t,energy");
  // header plus one row per (tau, variable, norm)
  const std::string rows = errors.str();
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 1 + 3 * 2 * 4);
}

TEST(Study, LinearKineticLieEulerErrorsMonotoneInTau) {
  StudyConfig cfg = default_config(ProblemKind::Kinetic);
  cfg.schemes = {Scheme::LieEuler};
  cfg.check_reference = false;
  const StudyResult r = run_study(cfg);
  for (const char* var : {"u", "p"}) {
    for (const Norm n : cfg.norms) {
      for (std::size_t k = 0; k + 1 < cfg.tau_list.size(); ++k) {
        EXPECT_LE(r.error(Scheme::LieEuler, 0.09, cfg.tau_list[k + 1], var, n),
                  r.error(Scheme::LieEuler, 0.09, cfg.tau_list[k], var, n))
            << var << ' ' << to_string(n) << " tau=" << cfg.tau_list[k + 1];
      }
    }
  }
}

TEST(Study, AcousticRejectsKineticOnlySchemes) {
  StudyConfig cfg = default_config(ProblemKind::Acoustic);
  cfg.schemes = {Scheme::StrangEuler};
  EXPECT_THROW(run_study(cfg), std::invalid_argument);
}

TEST(Study, AcousticOrderSeparation) {
  StudyConfig cfg = default_config(ProblemKind::Acoustic);
  cfg.norms = {Norm::L2L2};
  cfg.check_reference = false;
  const StudyResult r = run_study(cfg);
  for (const char* var : {"u", "delta"}) {
    const OrderEstimate* lie = r.order(Scheme::LieEuler, 0.09, var, Norm::L2L2);
    const OrderEstimate* strang = r.order(Scheme::StrangCN, 0.09, var, Norm::L2L2);
    ASSERT_TRUE(lie && strang);
    EXPECT_GE(strang->least_squares - lie->least_squares, 0.7) << var;
  }
}
