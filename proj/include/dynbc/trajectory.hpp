#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbc/linalg.hpp"

namespace dynbc {

/// Bulk and surface positions sampled on an equidistant time grid.
struct Trajectory {
  double sample_dt = 0.0;
  std::vector<double> times;
  std::vector<Vector> bulk;
  std::vector<Vector> surface;
  std::vector<double> energy;
  /// Steps after which the kinetic trace constraint u2 == p did not hold bitwise.
  std::size_t constraint_violations = 0;

  std::size_t size() const { return times.size(); }

  void push(double t, Vector u, Vector p, double e) {
    times.push_back(t);
    bulk.push_back(std::move(u));
    surface.push_back(std::move(p));
    energy.push_back(e);
  }
};

/// round(total / step), rejecting non-integer ratios.
inline std::size_t step_count(double total, double step, const char* what) {
  if (!(step > 0.0) || !(total > 0.0)) throw std::invalid_argument(std::string(what) + ": non-positive length");
  const double ratio = total / step;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    throw std::invalid_argument(std::string(what) + ": step does not divide the interval");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace dynbc
