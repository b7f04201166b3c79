#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "dynbc/experiments.hpp"
#include "dynbc/norms.hpp"
#include "dynbc/study_config.hpp"

namespace dynbc {

struct ErrorRecord {
  Scheme scheme;
  double h_target;
  double h;
  double tau;
  std::string variable;
  Norm norm;
  double error;
};

struct OrderRecord {
  Scheme scheme;
  double h_target;
  std::string variable;
  Norm norm;
  OrderEstimate estimate;
};

struct EnergyRecord {
  Scheme scheme;
  double h_target;
  double tau;
  double t;
  double energy;
};

struct StudyFailure {
  Scheme scheme;
  double h_target;
  double tau;
  std::string message;
};

/// Distance between the references at tau_ref and 2*tau_ref.
struct ReferenceCheck {
  double h_target;
  std::string variable;
  ErrorNorms gap;
};

struct StudyResult {
  StudyConfig config;
  std::vector<ErrorRecord> errors;
  std::vector<OrderRecord> orders;
  std::vector<EnergyRecord> energies;
  std::vector<StudyFailure> failures;
  std::vector<ReferenceCheck> reference_checks;
  std::size_t constraint_violations = 0;

  /// NaN if the point is missing.
  double error(Scheme s, double h_target, double tau, const std::string& var, Norm n) const {
    for (const auto& e : errors) {
      if (e.scheme == s && e.h_target == h_target && e.tau == tau && e.variable == var && e.norm == n) return e.error;
    }
    return NAN;
  }

  const OrderEstimate* order(Scheme s, double h_target, const std::string& var, Norm n) const {
    for (const auto& o : orders) {
      if (o.scheme == s && o.h_target == h_target && o.variable == var && o.norm == n) return &o.estimate;
    }
    return nullptr;
  }

  /// Error records whose reference gap is not at least 4x below the error.
  std::vector<ErrorRecord> inadequate_reference_points() const {
    std::vector<ErrorRecord> out;
    for (const auto& e : errors) {
      for (const auto& c : reference_checks) {
        if (c.h_target == e.h_target && c.variable == e.variable && 4.0 * c.gap.get(e.norm) > e.error) {
          out.push_back(e);
        }
      }
    }
    return out;
  }
};

inline const char* surface_variable(ProblemKind p) { return p == ProblemKind::Kinetic ? "p" : "delta"; }

namespace detail {

struct MeshContext {
  double h_target;
  double h;
  const BlockSystem* blocks;
  Trajectory reference;
};

inline void record_run(StudyResult& result, const StudyConfig& cfg, const MeshContext& ctx, Scheme scheme,
                       double tau, const Trajectory& traj) {
  const std::size_t stride = step_count(tau, ctx.reference.sample_dt, "study sampling");
  const auto& b = *ctx.blocks;
  const ErrorNorms bulk = error_norms(traj.bulk, ctx.reference.bulk, stride, tau, b.M_bulk, b.A_bulk);
  const ErrorNorms surf = error_norms(traj.surface, ctx.reference.surface, stride, tau, b.M_surf, b.L_surf);
  for (const Norm n : cfg.norms) {
    result.errors.push_back({scheme, ctx.h_target, ctx.h, tau, "u", n, bulk.get(n)});
    result.errors.push_back({scheme, ctx.h_target, ctx.h, tau, surface_variable(cfg.problem), n, surf.get(n)});
  }
  for (std::size_t k = 0; k < traj.size(); ++k) {
    result.energies.push_back({scheme, ctx.h_target, tau, traj.times[k], traj.energy[k]});
  }
  result.constraint_violations += traj.constraint_violations;
}

inline Substepper substepper_of(Scheme s) {
  return (s == Scheme::LieEuler || s == Scheme::StrangEuler) ? Substepper::Euler : Substepper::CrankNicolson;
}

inline Splitting splitting_of(Scheme s) {
  return (s == Scheme::LieEuler || s == Scheme::LieCN) ? Splitting::Lie : Splitting::Strang;
}

}  // namespace detail

/// Runs every (scheme, tau) point of the study on every mesh and compares
/// against a monolithic Crank-Nicolson reference on the same mesh. A failing
/// point is recorded and skipped.
inline StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyResult result;
  result.config = cfg;
  const double tau_min = cfg.min_tau();

  for (const double h_target : cfg.h_targets) {
    const Mesh mesh = generate_disc_mesh(h_target);
    const double h = mesh_width(mesh);

    if (cfg.problem == ProblemKind::Kinetic) {
      const KineticProblem prob = make_kinetic_problem(mesh, cfg);
      const KineticState init = kinetic_initial_state(prob, mesh);
      const Vector u0 = init.u();
      const Vector w0 = init.w();
      detail::MeshContext ctx{h_target, h, &prob.blocks, kinetic_reference_solve(prob, u0, w0, cfg.tau_ref, tau_min)};
      if (cfg.check_reference) {
        const Trajectory coarse = kinetic_reference_solve(prob, u0, w0, 2.0 * cfg.tau_ref, tau_min);
        result.reference_checks.push_back(
            {h_target, "u", error_norms(coarse.bulk, ctx.reference.bulk, 1, tau_min, prob.blocks.M_bulk, prob.blocks.A_bulk)});
        result.reference_checks.push_back({h_target, "p",
                                           error_norms(coarse.surface, ctx.reference.surface, 1, tau_min,
                                                       prob.blocks.M_surf, prob.blocks.L_surf)});
      }
      for (const Scheme scheme : cfg.schemes) {
        for (const double tau : cfg.tau_list) {
          try {
            const Trajectory traj =
                scheme == Scheme::ReferenceCN
                    ? kinetic_reference_solve(prob, u0, w0, tau, tau)
                    : run_kinetic_splitting(prob, init, detail::splitting_of(scheme), detail::substepper_of(scheme), tau);
            detail::record_run(result, cfg, ctx, scheme, tau, traj);
          } catch (const std::exception& ex) {
            result.failures.push_back({scheme, h_target, tau, ex.what()});
          }
        }
      }
    } else {
      const AcousticProblem prob = make_acoustic_problem(mesh, cfg);
      const AcousticState init = acoustic_initial_state(mesh);
      detail::MeshContext ctx{h_target, h, &prob.blocks, acoustic_reference_solve(prob, init, cfg.tau_ref, tau_min)};
      if (cfg.check_reference) {
        const Trajectory coarse = acoustic_reference_solve(prob, init, 2.0 * cfg.tau_ref, tau_min);
        result.reference_checks.push_back(
            {h_target, "u", error_norms(coarse.bulk, ctx.reference.bulk, 1, tau_min, prob.blocks.M_bulk, prob.blocks.A_bulk)});
        result.reference_checks.push_back({h_target, "delta",
                                           error_norms(coarse.surface, ctx.reference.surface, 1, tau_min,
                                                       prob.blocks.M_surf, prob.blocks.L_surf)});
      }
      for (const Scheme scheme : cfg.schemes) {
        for (const double tau : cfg.tau_list) {
          try {
            Trajectory traj;
            if (scheme == Scheme::ReferenceCN) {
              traj = acoustic_reference_solve(prob, init, tau, tau);
            } else {
              const auto kind =
                  scheme == Scheme::LieEuler ? AcousticScheme::LieEuler : AcousticScheme::StrangCrankNicolson;
              traj = run_acoustic_splitting(prob, init, kind, tau);
            }
            detail::record_run(result, cfg, ctx, scheme, tau, traj);
          } catch (const std::exception& ex) {
            result.failures.push_back({scheme, h_target, tau, ex.what()});
          }
        }
      }
    }

    // orders per (scheme, variable, norm) on this mesh
    for (const Scheme scheme : cfg.schemes) {
      for (const std::string& var : {std::string("u"), std::string(surface_variable(cfg.problem))}) {
        for (const Norm n : cfg.norms) {
          std::vector<double> taus;
          std::vector<double> errs;
          for (const auto& e : result.errors) {
            if (e.scheme == scheme && e.h_target == h_target && e.variable == var && e.norm == n) {
              taus.push_back(e.tau);
              errs.push_back(e.error);
            }
          }
          if (taus.size() < 3) continue;
          try {
            result.orders.push_back({scheme, h_target, var, n, fit_orders(taus, errs)});
          } catch (const std::invalid_argument&) {
            // zero errors (e.g. a scheme compared with itself) carry no order
          }
        }
      }
    }
  }
  return result;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline void write_errors_csv(std::ostream& os, const StudyResult& r) {
  os << "scheme,h_target,h,tau,variable,norm,error\n";
  for (const auto& e : r.errors) {
    os << to_string(e.scheme) << ',' << detail::fmt_short(e.h_target) << ',' << detail::fmt(e.h) << ','
       << detail::fmt(e.tau) << ',' << e.variable << ',' << to_string(e.norm) << ',' << detail::fmt(e.error) << '\n';
  }
}

inline void write_orders_csv(std::ostream& os, const StudyResult& r) {
  os << "scheme,h_target,variable,norm,averaged_order,lsq_order,pairwise_orders\n";
  for (const auto& o : r.orders) {
    os << to_string(o.scheme) << ',' << detail::fmt_short(o.h_target) << ',' << o.variable << ','
       << to_string(o.norm) << ',' << detail::fmt(o.estimate.averaged) << ',' << detail::fmt(o.estimate.least_squares)
       << ',';
    for (std::size_t k = 0; k < o.estimate.pairwise.size(); ++k) {
      os << (k ? ";" : "") << detail::fmt_short(o.estimate.pairwise[k]);
    }
    os << '\n';
  }
}

inline void write_energy_csv(std::ostream& os, const StudyResult& r) {
  os << "scheme,h_target,tau,t,energy\n";
  for (const auto& e : r.energies) {
    os << to_string(e.scheme) << ',' << detail::fmt_short(e.h_target) << ',' << detail::fmt(e.tau) << ','
       << detail::fmt(e.t) << ',' << detail::fmt(e.energy) << '\n';
  }
}

/// gnuplot script: log-log L2(L2) error curves per scheme and mesh, one
/// panel per variable, dotted order-1 and order-2 guides.
inline void write_plot_script(std::ostream& os, const StudyResult& r) {
  const auto& cfg = r.config;
  const std::string surf = surface_variable(cfg.problem);
  os << "# usage: gnuplot plot.gp  (reads errors.csv, writes convergence.png)\n";
  os << "set datafile separator ','\n";
  os << "set terminal pngcairo size 1200,500\n";
  os << "set output 'convergence.png'\n";
  os << "set logscale xy\n";
  os << "set xlabel 'step size tau'\n";
  os << "set key bottom right\n";
  os << "set multiplot layout 1,2\n";
  const double tau_max = *std::max_element(cfg.tau_list.begin(), cfg.tau_list.end());
  for (const std::string& var : {std::string("u"), surf}) {
    os << "set title 'L2(L2) error in " << var << "'\n";
    os << "plot \\\n";
    int style = 0;
    for (const Scheme s : cfg.schemes) {
      for (const double h : cfg.h_targets) {
        os << "  'errors.csv' using (strcol(1) eq '" << to_string(s) << "' && $2 == " << detail::fmt_short(h)
           << " && strcol(5) eq '" << var << "' && strcol(6) eq 'L2L2' ? $4 : 1/0):7 with linespoints lw 2 dt "
           << (style % 2 == 0 ? 1 : 2) << " title '" << to_string(s) << ", h=" << detail::fmt_short(h) << "', \\\n";
        ++style;
      }
    }
    os << "  " << detail::fmt_short(0.6 / tau_max) << "*x with lines dt 3 lc 'gray' title 'order 1', \\\n";
    os << "  " << detail::fmt_short(0.1 / (tau_max * tau_max)) << "*x**2 with lines dt 3 lc 'gray' title 'order 2'\n";
  }
  os << "unset multiplot\n";
}

/// Writes errors.csv, orders.csv, energy.csv and plot.gp into cfg.output_dir.
inline void write_study_outputs(const StudyResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("errors.csv");
    write_errors_csv(f, r);
  }
  {
    auto f = open("orders.csv");
    write_orders_csv(f, r);
  }
  {
    auto f = open("energy.csv");
    write_energy_csv(f, r);
  }
  {
    auto f = open("plot.gp");
    write_plot_script(f, r);
  }
}

}  // namespace dynbc
