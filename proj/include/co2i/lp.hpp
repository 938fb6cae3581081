#pragma once

// Linear programs in the inequality form
//
//     min c'x   s.t.   a_i x <= b_i  (or a_i x = b_i for equality rows)
//
// with free variables; variable bounds are ordinary single-entry rows. The
// simplex solver folds single-entry rows into column bounds internally but
// reports one dual per original row, so the active-set view of the problem
// matches the row set the caller built.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <atomic>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace co2i::lp {

enum class RowSense { LessEqual, Equal };

struct StandardFormLP {
  std::vector<double> cost;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  std::vector<double> rhs;
  std::vector<RowSense> sense;
  std::vector<std::string> row_tags;
  std::vector<std::string> col_tags;

  int num_rows() const { return static_cast<int>(rhs.size()); }
  int num_cols() const { return static_cast<int>(cost.size()); }
  /// Throws std::logic_error when the sizes of A, b, c and tags disagree.
  void check_dimensions() const;
  /// a_i x for every row.
  std::vector<double> row_activity(const std::vector<double>& x) const;
};

/// Incremental construction of a StandardFormLP.
class LpBuilder {
 public:
  int add_col(std::string tag, double cost = 0.0);
  int add_row(std::string tag, RowSense sense, double rhs,
              const std::vector<std::pair<int, double>>& entries);
  void set_cost(int col, double cost) { cost_[static_cast<size_t>(col)] = cost; }
  double cost(int col) const { return cost_[static_cast<size_t>(col)]; }
  int num_cols() const { return static_cast<int>(cost_.size()); }
  StandardFormLP build() const;

 private:
  std::vector<double> cost_;
  std::vector<std::string> col_tags_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> rhs_;
  std::vector<RowSense> sense_;
  std::vector<std::string> row_tags_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };
const char* to_string(SolveStatus status);

struct LPSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> x;
  /// Multiplier per row with c + A'lambda = 0; >= 0 on inequality rows.
  std::vector<double> duals;
  double objective = 0.0;
  /// Basic variables: column j for structurals, num_cols + i for the slack
  /// of row i. Sorted.
  std::vector<int> basis;
  /// Rows that pin the vertex: equality rows and inequality rows whose slack
  /// is nonbasic, plus the bound row of every nonbasic column. Sorted; has
  /// num_cols entries when the vertex is fully determined.
  std::vector<int> defining_rows;
  long iterations = 0;
  bool used_bland = false;
  /// Unbounded: a ray d with c'd < 0 and A d <= 0. Infeasible: row weights
  /// y >= 0 (free on equality rows) proving A'y = 0, b'y < 0 up to bounds.
  std::vector<double> certificate;
};

struct SolveOptions {
  double feasibility_tol = 1e-9;   // absolute, scaled by max(1, |b|_inf)
  double optimality_tol = 1e-11;   // reduced costs
  double pivot_tol = 1e-9;
  int degenerate_streak_for_bland = 50;
  long max_iterations = 0;  // 0 = automatic cap
  int reinvert_every = 200;
  bool parallel_pivot = false;
};

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NumericalFailure : public LpError {
 public:
  using LpError::LpError;
};
class SingularBasis : public LpError {
 public:
  using LpError::LpError;
};

/// Revised bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing; switches to Bland's rule once a run of degenerate pivots
/// exceeds `degenerate_streak_for_bland`. Deterministic.
LPSolution solve(const StandardFormLP& lp, const SolveOptions& options = {});

/// Tolerances used for certification of an optimal pair.
struct Tolerances {
  double feasibility = 1e-7;  // relative to max(1, |b|_inf)
  double duality = 1e-7;      // relative to max(1, |c'x|)
  double active_dual = 1e-9;
};

struct ActiveSet {
  std::vector<int> rows;            // lambda_i > tol, plus all equality rows
  std::vector<int> tight_zero_dual; // tight inequality rows with lambda_i <= tol
};

ActiveSet active_set(const StandardFormLP& lp, const LPSolution& sol, double tol = 1e-9);

struct Certificate {
  double primal_infeasibility = 0.0;  // max(A x - b, 0) and |A x - b| on equalities
  double dual_residual = 0.0;         // |c + A' lambda|_inf
  double dual_sign_violation = 0.0;   // max(-lambda_i) over inequality rows
  double complementary_slackness = 0.0;  // sum |(a_i x - b_i) lambda_i|
  double duality_gap = 0.0;           // |c'x + b'lambda|
};

Certificate certify(const StandardFormLP& lp, const LPSolution& sol);

/// Instrumentation for the efficiency contract of the sensitivity sweep.
struct Counters {
  std::atomic<long> lp_solves{0};
  std::atomic<long> basis_factorizations{0};
  void reset() {
    lp_solves = 0;
    basis_factorizations = 0;
  }
};
Counters& counters();

using SparseRhs = std::vector<std::pair<int, double>>;

/// LU factorization of the square vertex system A_D dx = db_D, where D are
/// the defining rows of an optimal basis. Immutable after construction;
/// solve() may be called concurrently.
class BasisFactorization {
 public:
  /// Throws SingularBasis if the vertex is not fully determined or the
  /// system is numerically singular.
  BasisFactorization(const StandardFormLP& lp, const LPSolution& sol);

  int size() const { return static_cast<int>(rows_.size()); }
  const std::vector<int>& rows() const { return rows_; }
  bool contains(int row) const { return position_[static_cast<size_t>(row)] >= 0; }

  /// dx for a right-hand-side change supported on defining rows. Throws
  /// std::invalid_argument for entries on rows outside the system.
  Eigen::VectorXd solve(const SparseRhs& delta_b) const;

  /// Position of a defining row in the system, -1 if absent.
  int position(int row) const { return position_[static_cast<size_t>(row)]; }
  /// Dense solves with right-hand sides indexed by position.
  Eigen::VectorXd solve_dense(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& rhs) const;

 private:
  std::vector<int> rows_;
  std::vector<int> position_;  // row -> position in rows_, or -1
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

/// One-shot convenience wrapper: factorizes and solves once.
Eigen::VectorXd basis_solve(const StandardFormLP& lp, const LPSolution& sol,
                            const SparseRhs& delta_b);

}  // namespace co2i::lp
