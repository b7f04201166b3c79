#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dynbc/linalg.hpp"
#include "dynbc/study_config.hpp"

namespace dynbc {

/// Space-time error norms of one variable.
struct ErrorNorms {
  double linf_l2 = 0.0;
  double linf_h1 = 0.0;
  double l2_l2 = 0.0;
  double l2_h1 = 0.0;

  double get(Norm n) const {
    switch (n) {
      case Norm::LinfL2: return linf_l2;
      case Norm::LinfH1: return linf_h1;
      case Norm::L2L2: return l2_l2;
      case Norm::L2H1: return l2_h1;
    }
    return NAN;
  }
};

/// Compares samples[n] against reference[n * stride] for n = 0..N.
///
/// Spatial norms: |e|_L2^2 = e^T M e and |e|_H1^2 = e^T (M + L) e with L the
/// (coefficient free) Laplacian stiffness. Time: maximum over all samples,
/// and the left rectangle rule sqrt(dt * sum_{n<N} |e_n|^2).
inline ErrorNorms error_norms(const std::vector<Vector>& samples, const std::vector<Vector>& reference,
                              std::size_t stride, double dt, const SparseMatrix& mass, const SparseMatrix& laplace) {
  if (samples.empty() || stride == 0) throw std::invalid_argument("error_norms: empty trajectory");
  if ((samples.size() - 1) * stride >= reference.size()) {
    throw std::invalid_argument("error_norms: time grid mismatch with reference");
  }
  ErrorNorms out;
  double sum_l2 = 0.0;
  double sum_h1 = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const Vector& ref = reference[n * stride];
    require_dims(samples[n].size() == ref.size() && ref.size() == mass.rows(), "error_norms");
    const Vector e = samples[n] - ref;
    const Vector me = mass * e;
    const double l2_sq = std::max(0.0, e.dot(me));
    const double h1_sq = std::max(0.0, l2_sq + e.dot(laplace * e));
    out.linf_l2 = std::max(out.linf_l2, std::sqrt(l2_sq));
    out.linf_h1 = std::max(out.linf_h1, std::sqrt(h1_sq));
    if (n + 1 < samples.size()) {
      sum_l2 += l2_sq;
      sum_h1 += h1_sq;
    }
  }
  out.l2_l2 = std::sqrt(dt * sum_l2);
  out.l2_h1 = std::sqrt(dt * sum_h1);
  return out;
}

struct OrderEstimate {
  /// Mean of the pairwise orders.
  double averaged = NAN;
  /// Least-squares slope of log(error) against log(tau).
  double least_squares = NAN;
  std::vector<double> pairwise;
};

/// Convergence orders from errors at (at least three) step sizes.
inline OrderEstimate fit_orders(std::vector<double> taus, std::vector<double> errors) {
  if (taus.size() != errors.size()) throw std::invalid_argument("fit_orders: size mismatch");
  if (taus.size() < 3) throw std::invalid_argument("fit_orders: need at least three step sizes");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]) || !(taus[i] > 0.0)) {
      throw std::invalid_argument("fit_orders: errors and steps must be positive and finite");
    }
  }
  std::vector<std::size_t> order(taus.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return taus[a] > taus[b]; });

  OrderEstimate out;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const std::size_t a = order[k];
    const std::size_t b = order[k + 1];
    if (taus[a] == taus[b]) throw std::invalid_argument("fit_orders: duplicate step size");
    out.pairwise.push_back(std::log(errors[a] / errors[b]) / std::log(taus[a] / taus[b]));
  }
  out.averaged = std::accumulate(out.pairwise.begin(), out.pairwise.end(), 0.0) /
                 static_cast<double>(out.pairwise.size());

  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    mx += std::log(taus[i]);
    my += std::log(errors[i]);
  }
  mx /= static_cast<double>(taus.size());
  my /= static_cast<double>(taus.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double dx = std::log(taus[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  out.least_squares = sxy / sxx;
  return out;
}

}  // namespace dynbc
