#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace dynbc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
/// Row-major compressed storage, i.e. CSR.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string("dimension mismatch in ") + what);
}

inline Vector spmv(const SparseMatrix& a, const Vector& x) {
  require_dims(a.cols() == x.size(), "spmv");
  return a * x;
}

/// alpha*A + beta*B on the union of both sparsity patterns.
inline SparseMatrix add_scaled(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "add_scaled");
  SparseMatrix result = alpha * a + beta * b;
  result.makeCompressed();
  return result;
}

inline SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

/// Copy of the block A[row0 : row0+n_rows, col0 : col0+n_cols].
inline SparseMatrix extract_block(const SparseMatrix& a, Index row0, Index col0, Index n_rows, Index n_cols) {
  require_dims(row0 >= 0 && col0 >= 0 && row0 + n_rows <= a.rows() && col0 + n_cols <= a.cols(), "extract_block");
  SparseMatrix block = a.block(row0, col0, n_rows, n_cols);
  block.makeCompressed();
  return block;
}

/// n x n matrix holding `s` in its trailing diagonal block.
inline SparseMatrix embed_trailing(const SparseMatrix& s, Index n) {
  require_dims(s.rows() == s.cols() && s.rows() <= n, "embed_trailing");
  const Index offset = n - s.rows();
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(s.nonZeros()));
  for (Index r = 0; r < s.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(s, r); it; ++it) {
      entries.emplace_back(offset + it.row(), offset + it.col(), it.value());
    }
  }
  SparseMatrix result(n, n);
  result.setFromTriplets(entries.begin(), entries.end());
  return result;
}

/// Largest |A_ij - A_ji|.
inline double asymmetry(const SparseMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  const SparseMatrix at = a.transpose();
  const SparseMatrix diff = a - at;
  double m = 0.0;
  for (Index k = 0; k < diff.nonZeros(); ++k) m = std::max(m, std::abs(diff.valuePtr()[k]));
  return m;
}

enum class SolveMethod { Cholesky, ConjugateGradient };

struct LinearSolveOptions {
  SolveMethod method = SolveMethod::Cholesky;
  double rel_tolerance = 1e-12;
  int max_iterations = 10000;

  void validate() const {
    if (!(rel_tolerance > 0.0)) throw std::invalid_argument("LinearSolveOptions: rel_tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("LinearSolveOptions: max_iterations must be >= 1");
  }
};

/// Factor-once solver for symmetric positive definite matrices.
///
/// The direct path applies up to three steps of iterative refinement if
/// the residual misses the tolerance; the CG path is diagonally
/// preconditioned.
class SpdSolver {
 public:
  explicit SpdSolver(const SparseMatrix& a, LinearSolveOptions opts = {}) : a_(a), opts_(opts) {
    opts_.validate();
    require_dims(a.rows() == a.cols(), "SpdSolver");
    if (opts_.method == SolveMethod::Cholesky) {
      llt_.compute(a_);
      if (llt_.info() != Eigen::Success) {
        throw SolverError("SpdSolver: Cholesky factorization failed (matrix not SPD)");
      }
    } else {
      cg_.setTolerance(opts_.rel_tolerance);
      cg_.setMaxIterations(opts_.max_iterations);
      cg_.compute(a_);
      if (cg_.info() != Eigen::Success) throw SolverError("SpdSolver: CG setup failed");
    }
  }

  Index size() const { return a_.rows(); }

  Vector solve(const Vector& b) const {
    require_dims(b.size() == a_.rows(), "SpdSolver::solve");
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vector::Zero(b.size());
    if (opts_.method == SolveMethod::ConjugateGradient) {
      Vector x = cg_.solve(b);
      if (cg_.info() != Eigen::Success) {
        throw SolverError("SpdSolver: CG did not converge within " + std::to_string(opts_.max_iterations) +
                          " iterations");
      }
      return x;
    }
    Vector x = llt_.solve(b);
    for (int refinement = 0; refinement < 3; ++refinement) {
      const Vector residual = b - a_ * x;
      if (residual.norm() <= opts_.rel_tolerance * bnorm) return x;
      x += llt_.solve(residual);
    }
    if ((b - a_ * x).norm() > opts_.rel_tolerance * bnorm) {
      throw SolverError("SpdSolver: residual above tolerance after refinement");
    }
    return x;
  }

 private:
  using ColMajor = Eigen::SparseMatrix<double>;
  ColMajor a_;
  LinearSolveOptions opts_;
  Eigen::SimplicialLLT<ColMajor> llt_;
  Eigen::ConjugateGradient<ColMajor, Eigen::Lower | Eigen::Upper> cg_;
};

/// Sparse LU for the nonsymmetric (skew-damped) system matrices.
class LuSolver {
 public:
  explicit LuSolver(const SparseMatrix& a, LinearSolveOptions opts = {}) : a_(a), opts_(opts) {
    opts_.validate();
    require_dims(a.rows() == a.cols(), "LuSolver");
    lu_.analyzePattern(a_);
    lu_.factorize(a_);
    if (lu_.info() != Eigen::Success) throw SolverError("LuSolver: factorization failed: " + lu_.lastErrorMessage());
  }

  Index size() const { return a_.rows(); }

  Vector solve(const Vector& b) const {
    require_dims(b.size() == a_.rows(), "LuSolver::solve");
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Vector::Zero(b.size());
    // SparseLU::solve is not const-qualified in Eigen 3.4
    auto& lu = const_cast<Eigen::SparseLU<ColMajor>&>(lu_);
    Vector x = lu.solve(b);
    for (int refinement = 0; refinement < 3; ++refinement) {
      const Vector residual = b - a_ * x;
      if (residual.norm() <= opts_.rel_tolerance * bnorm) return x;
      x += lu.solve(residual);
    }
    if ((b - a_ * x).norm() > opts_.rel_tolerance * bnorm) {
      throw SolverError("LuSolver: residual above tolerance after refinement");
    }
    return x;
  }

 private:
  using ColMajor = Eigen::SparseMatrix<double>;
  ColMajor a_;
  LinearSolveOptions opts_;
  Eigen::SparseLU<ColMajor> lu_;
};

/// Either factorization behind one interface; chosen by symmetry of the matrix.
class FactoredMatrix {
 public:
  FactoredMatrix(const SparseMatrix& a, bool symmetric, LinearSolveOptions opts = {}) {
    if (symmetric) {
      spd_ = std::make_unique<SpdSolver>(a, opts);
    } else {
      lu_ = std::make_unique<LuSolver>(a, opts);
    }
  }

  Vector solve(const Vector& b) const { return spd_ ? spd_->solve(b) : lu_->solve(b); }

 private:
  std::unique_ptr<SpdSolver> spd_;
  std::unique_ptr<LuSolver> lu_;
};

inline Vector solve_spd(const SparseMatrix& a, const Vector& b, const LinearSolveOptions& opts = {}) {
  return SpdSolver(a, opts).solve(b);
}

/// MatrixMarket coordinate export (1-based indices).
inline void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  const auto old_precision = os.precision(17);
  for (Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace dynbc
