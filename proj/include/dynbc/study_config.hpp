#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbc/trajectory.hpp"

namespace dynbc {

enum class ProblemKind { Kinetic, Acoustic };
enum class Scheme { LieEuler, LieCN, StrangEuler, StrangCN, ReferenceCN };
enum class Nonlinearity { None, AllenCahnBulk, AllenCahnSurface };
enum class Norm { LinfL2, LinfH1, L2L2, L2H1 };

inline const char* to_string(ProblemKind p) { return p == ProblemKind::Kinetic ? "kinetic" : "acoustic"; }

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::LieEuler: return "lie-euler";
    case Scheme::LieCN: return "lie-cn";
    case Scheme::StrangEuler: return "strang-euler";
    case Scheme::StrangCN: return "strang-cn";
    case Scheme::ReferenceCN: return "reference-cn";
  }
  return "?";
}

inline const char* to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::None: return "none";
    case Nonlinearity::AllenCahnBulk: return "allen-cahn-bulk";
    case Nonlinearity::AllenCahnSurface: return "allen-cahn-surface";
  }
  return "?";
}

inline const char* to_string(Norm n) {
  switch (n) {
    case Norm::LinfL2: return "LinfL2";
    case Norm::LinfH1: return "LinfH1";
    case Norm::L2L2: return "L2L2";
    case Norm::L2H1: return "L2H1";
  }
  return "?";
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename E, std::size_t N>
E parse_enum(const std::string& text, const E (&values)[N], const char* what) {
  for (const E v : values) {
    if (text == to_string(v)) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": '" + text + "'");
}

}  // namespace detail

inline ProblemKind parse_problem(const std::string& s) {
  static constexpr ProblemKind all[] = {ProblemKind::Kinetic, ProblemKind::Acoustic};
  return detail::parse_enum(s, all, "problem");
}

inline Scheme parse_scheme(const std::string& s) {
  static constexpr Scheme all[] = {Scheme::LieEuler, Scheme::LieCN, Scheme::StrangEuler, Scheme::StrangCN,
                                   Scheme::ReferenceCN};
  return detail::parse_enum(s, all, "scheme");
}

inline Nonlinearity parse_nonlinearity(const std::string& s) {
  static constexpr Nonlinearity all[] = {Nonlinearity::None, Nonlinearity::AllenCahnBulk,
                                         Nonlinearity::AllenCahnSurface};
  return detail::parse_enum(s, all, "nonlinearity");
}

inline Norm parse_norm(const std::string& s) {
  static constexpr Norm all[] = {Norm::LinfL2, Norm::LinfH1, Norm::L2L2, Norm::L2H1};
  return detail::parse_enum(s, all, "norm");
}

/// Parses a real, accepting powers of two written as "2^-k".
inline double parse_real(const std::string& text) {
  const std::string s = detail::trim(text);
  const auto caret = s.find('^');
  std::size_t used = 0;
  double value = 0.0;
  try {
    if (caret != std::string::npos) {
      const double base = std::stod(s.substr(0, caret));
      const std::string exponent = s.substr(caret + 1);
      value = std::pow(base, std::stod(exponent, &used));
      used += caret + 1;
    } else {
      value = std::stod(s, &used);
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return value;
}

inline std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(s)) out.push_back(parse_real(item));
  return out;
}

inline std::vector<double> powers_of_two(int first_exponent, int last_exponent) {
  std::vector<double> out;
  for (int k = first_exponent; k >= last_exponent; --k) out.push_back(std::ldexp(1.0, k));
  return out;
}

/// Description of one convergence study.
struct StudyConfig {
  ProblemKind problem = ProblemKind::Kinetic;
  std::vector<Scheme> schemes = {Scheme::LieEuler};
  std::vector<double> h_targets = {0.09};
  std::vector<double> tau_list = powers_of_two(-4, -9);
  double tau_ref = std::ldexp(1.0, -11);
  double final_time = 1.0;
  double beta = 1.0;
  double kappa = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::None;
  std::vector<Norm> norms = {Norm::LinfL2, Norm::LinfH1, Norm::L2L2, Norm::L2H1};
  std::string output_dir;
  /// Also solve the reference with 2*tau_ref and report the gap.
  bool check_reference = true;

  /// Large-scale preset: fine mesh, finer reference, longer tau list.
  void apply_paper_scale() {
    h_targets = {0.02};
    tau_ref = std::ldexp(1.0, -12);
    tau_list = powers_of_two(-4, -10);
  }

  double min_tau() const { return *std::min_element(tau_list.begin(), tau_list.end()); }

  bool only_reference() const {
    return std::all_of(schemes.begin(), schemes.end(), [](Scheme s) { return s == Scheme::ReferenceCN; });
  }

  void validate() const {
    if (!(final_time > 0.0)) throw std::invalid_argument("StudyConfig: T must be positive");
    if (schemes.empty()) throw std::invalid_argument("StudyConfig: no scheme selected");
    if (h_targets.empty()) throw std::invalid_argument("StudyConfig: no mesh size");
    if (tau_list.empty()) throw std::invalid_argument("StudyConfig: empty tau list");
    if (norms.empty()) throw std::invalid_argument("StudyConfig: no norm selected");
    if (!(beta >= 0.0) || !(kappa >= 0.0)) throw std::invalid_argument("StudyConfig: beta, kappa must be >= 0");
    for (const double h : h_targets) {
      if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("StudyConfig: h must lie in (0, 1)");
    }
    step_count(final_time, tau_ref, "StudyConfig tau_ref");
    const double tau_min = min_tau();
    for (const double tau : tau_list) {
      step_count(final_time, tau, "StudyConfig tau");
      step_count(tau, tau_min, "StudyConfig tau vs finest tau");
    }
    step_count(tau_min, tau_ref, "StudyConfig finest tau vs tau_ref");
    // the reference has to be at least four times finer than every scheme run
    if (!only_reference() && tau_ref > 0.25 * tau_min * (1.0 + 1e-12)) {
      throw std::invalid_argument("StudyConfig: tau_ref must be at most min(tau_list)/4");
    }
    if (problem == ProblemKind::Acoustic) {
      for (const Scheme s : schemes) {
        if (s == Scheme::LieCN || s == Scheme::StrangEuler) {
          throw std::invalid_argument(std::string("StudyConfig: scheme ") + to_string(s) +
                                      " is not defined for acoustic boundary conditions");
        }
      }
    }
  }
};

/// Default study for one problem class: the linear Gaussian pulse for
/// kinetic, the Allen-Cahn boundary nonlinearity for acoustic.
inline StudyConfig default_config(ProblemKind problem) {
  StudyConfig cfg;
  cfg.problem = problem;
  if (problem == ProblemKind::Kinetic) {
    cfg.schemes = {Scheme::LieEuler, Scheme::LieCN, Scheme::StrangEuler, Scheme::StrangCN};
    cfg.nonlinearity = Nonlinearity::None;
  } else {
    cfg.schemes = {Scheme::LieEuler, Scheme::StrangCN};
    cfg.nonlinearity = Nonlinearity::AllenCahnSurface;
  }
  return cfg;
}

/// Applies one key=value setting. Unknown keys are rejected.
inline void apply_setting(StudyConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") {
    cfg.problem = parse_problem(value);
  } else if (key == "scheme" || key == "schemes") {
    cfg.schemes.clear();
    for (const auto& s : detail::split_list(value)) cfg.schemes.push_back(parse_scheme(s));
  } else if (key == "h") {
    cfg.h_targets = parse_real_list(value);
  } else if (key == "tau_list" || key == "tau-list") {
    cfg.tau_list = parse_real_list(value);
  } else if (key == "tau_ref" || key == "tau-ref") {
    cfg.tau_ref = parse_real(value);
  } else if (key == "T") {
    cfg.final_time = parse_real(value);
  } else if (key == "beta") {
    cfg.beta = parse_real(value);
  } else if (key == "kappa") {
    cfg.kappa = parse_real(value);
  } else if (key == "nonlinearity") {
    cfg.nonlinearity = parse_nonlinearity(value);
  } else if (key == "norms") {
    cfg.norms.clear();
    for (const auto& s : detail::split_list(value)) cfg.norms.push_back(parse_norm(s));
  } else if (key == "out" || key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "check_reference") {
    cfg.check_reference = value == "1" || value == "true" || value == "yes";
  } else if (key == "paper_scale") {
    if (value == "1" || value == "true" || value == "yes") cfg.apply_paper_scale();
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

/// Flat key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    out[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

/// Reads a config file on top of the problem defaults. The problem key, if
/// present, selects the defaults before the other keys are applied.
inline StudyConfig read_config(std::istream& in) {
  const auto kv = read_key_values(in);
  StudyConfig cfg = default_config(ProblemKind::Kinetic);
  if (const auto it = kv.find("problem"); it != kv.end()) cfg = default_config(parse_problem(it->second));
  // paper_scale first so explicit keys override it
  if (const auto it = kv.find("paper_scale"); it != kv.end()) apply_setting(cfg, it->first, it->second);
  for (const auto& [key, value] : kv) {
    if (key != "problem" && key != "paper_scale") apply_setting(cfg, key, value);
  }
  return cfg;
}

inline StudyConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  return read_config(in);
}

}  // namespace dynbc
