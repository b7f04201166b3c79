// Command line driver: convergence studies and solution snapshots for the
// wave equation with kinetic or acoustic boundary conditions.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dynbc/study.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::optional<std::string> problem, scheme, h, tau_list, tau_ref, final_time, beta, kappa, nonlinearity, norms,
      out;
  bool paper_scale = false;
  bool no_reference_check = false;
};

void add_study_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "key=value config file");
  cmd->add_option("--problem", o.problem, "kinetic|acoustic");
  cmd->add_option("--scheme", o.scheme, "comma list of lie-euler, lie-cn, strang-euler, strang-cn, reference-cn");
  cmd->add_option("--h", o.h, "target mesh size(s), comma separated");
  cmd->add_option("--tau-list", o.tau_list, "step sizes, e.g. 2^-4,2^-5,2^-6");
  cmd->add_option("--tau-ref", o.tau_ref, "reference step size");
  cmd->add_option("--T", o.final_time, "final time");
  cmd->add_option("--beta", o.beta, "surface diffusion coefficient");
  cmd->add_option("--kappa", o.kappa, "surface reaction coefficient");
  cmd->add_option("--nonlinearity", o.nonlinearity, "none|allen-cahn-bulk|allen-cahn-surface");
  cmd->add_option("--norms", o.norms, "comma list of LinfL2, LinfH1, L2L2, L2H1");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--paper-scale", o.paper_scale, "h=0.02, tau_ref=2^-12, tau=2^-4..2^-10");
  cmd->add_flag("--no-reference-check", o.no_reference_check, "skip the 2*tau_ref reference comparison");
}

dynbc::StudyConfig build_config(const Overrides& o) {
  dynbc::StudyConfig cfg = o.config_file.empty() ? dynbc::default_config(dynbc::ProblemKind::Kinetic)
                                                 : dynbc::read_config_file(o.config_file);
  if (o.problem) {
    const auto kind = dynbc::parse_problem(*o.problem);
    if (o.config_file.empty()) cfg = dynbc::default_config(kind);
    cfg.problem = kind;
  }
  if (o.paper_scale) cfg.apply_paper_scale();
  auto set = [&cfg](const char* key, const std::optional<std::string>& v) {
    if (v) dynbc::apply_setting(cfg, key, *v);
  };
  set("scheme", o.scheme);
  set("h", o.h);
  set("tau_list", o.tau_list);
  set("tau_ref", o.tau_ref);
  set("T", o.final_time);
  set("beta", o.beta);
  set("kappa", o.kappa);
  set("nonlinearity", o.nonlinearity);
  set("norms", o.norms);
  set("out", o.out);
  if (o.no_reference_check) cfg.check_reference = false;
  return cfg;
}

void print_summary(std::ostream& os, const dynbc::StudyResult& r) {
  os << "problem " << dynbc::to_string(r.config.problem) << ", nonlinearity " << dynbc::to_string(r.config.nonlinearity)
     << '\n';
  for (const auto& o : r.orders) {
    if (o.norm != dynbc::Norm::L2L2 && o.norm != dynbc::Norm::L2H1) continue;
    os << "  " << dynbc::to_string(o.scheme) << "  h=" << o.h_target << "  " << o.variable << "  "
       << dynbc::to_string(o.norm) << "  averaged order " << o.estimate.averaged << "  (lsq "
       << o.estimate.least_squares << ")\n";
  }
  for (const auto& c : r.reference_checks) {
    os << "  reference gap (tau_ref vs 2 tau_ref) h=" << c.h_target << " " << c.variable << " L2L2 " << c.gap.l2_l2
       << '\n';
  }
  const auto weak = r.inadequate_reference_points();
  if (!weak.empty()) {
    os << "  warning: reference gap exceeds a quarter of " << weak.size()
       << " scheme error(s); consider a smaller --tau-ref\n";
  }
  for (const auto& f : r.failures) {
    os << "  FAILED " << dynbc::to_string(f.scheme) << " h=" << f.h_target << " tau=" << f.tau << ": " << f.message
       << '\n';
  }
  if (r.constraint_violations > 0) os << "  constraint violations: " << r.constraint_violations << '\n';
}

int run(const Overrides& o) {
  const auto cfg = build_config(o);
  const auto result = dynbc::run_study(cfg);
  print_summary(std::cout, result);
  if (!cfg.output_dir.empty()) {
    dynbc::write_study_outputs(result, cfg.output_dir);
    std::cout << "wrote errors.csv, orders.csv, energy.csv, plot.gp to " << cfg.output_dir << '\n';
  }
  return result.failures.empty() ? 0 : 2;
}

/// Reference solution at time t, one "x y value" line per bulk node.
int snapshot(const Overrides& o, double t, const std::string& file) {
  auto cfg = build_config(o);
  const double h = cfg.h_targets.front();
  const dynbc::Mesh mesh = dynbc::generate_disc_mesh(h);
  const double tau = cfg.tau_ref;
  dynbc::Vector u;
  if (t == 0.0) {
    u = cfg.problem == dynbc::ProblemKind::Kinetic ? dynbc::kinetic_initial_displacement(mesh)
                                                   : dynbc::acoustic_initial_state(mesh).u;
  } else {
    cfg.final_time = t;
    if (cfg.problem == dynbc::ProblemKind::Kinetic) {
      const auto prob = dynbc::make_kinetic_problem(mesh, cfg);
      const auto init = dynbc::kinetic_initial_state(prob, mesh);
      u = dynbc::kinetic_reference_solve(prob, init.u(), init.w(), tau, t).bulk.back();
    } else {
      const auto prob = dynbc::make_acoustic_problem(mesh, cfg);
      u = dynbc::acoustic_reference_solve(prob, dynbc::acoustic_initial_state(mesh), tau, t).bulk.back();
    }
  }
  std::ofstream file_stream;
  if (!file.empty()) {
    file_stream.open(file);
    if (!file_stream) throw std::runtime_error("cannot write " + file);
  }
  std::ostream& os = file.empty() ? std::cout : file_stream;
  os.precision(12);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
    os << mesh.vertices[i].x() << ' ' << mesh.vertices[i].y() << ' ' << u[static_cast<dynbc::Index>(i)] << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynbc: splitting schemes for the wave equation with dynamic boundary conditions"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run_cmd = app.add_subcommand("run", "run a convergence study");
  add_study_options(run_cmd, run_opts);

  Overrides snap_opts;
  double snap_time = 0.0;
  std::string snap_file;
  auto* snap_cmd = app.add_subcommand("snapshot", "dump the reference solution u at one time as 'x y value'");
  add_study_options(snap_cmd, snap_opts);
  snap_cmd->add_option("--t", snap_time, "time")->required();
  snap_cmd->add_option("--file", snap_file, "output file (default stdout)");

  double mesh_h = 0.09;
  std::string mesh_file;
  auto* mesh_cmd = app.add_subcommand("mesh", "write the disc mesh ('V T B' header format)");
  mesh_cmd->add_option("--h", mesh_h, "target mesh size");
  mesh_cmd->add_option("--file", mesh_file, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(run_opts);
    if (*snap_cmd) return snapshot(snap_opts, snap_time, snap_file);
    if (*mesh_cmd) {
      const auto mesh = dynbc::generate_disc_mesh(mesh_h);
      if (mesh_file.empty()) {
        dynbc::write_mesh(std::cout, mesh);
      } else {
        std::ofstream f(mesh_file);
        dynbc::write_mesh(f, mesh);
      }
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
