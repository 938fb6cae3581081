// Bounded-variable primal simplex on a dense tableau.
//
// Rows with a single nonzero become column bounds; the remaining rows get a
// logical variable s_i (a_i x + s_i = b_i, s_i >= 0 or s_i = 0). Phase 1
// minimizes the sum of bound violations of the basic variables, phase 2 the
// true cost. The tableau is periodically rebuilt from a sparse LU of the
// basis, and every terminal decision is taken on a freshly rebuilt tableau.

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "co2i/kernels.hpp"
#include "co2i/lp.hpp"

namespace co2i::lp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Solver {
 public:
  Solver(const StandardFormLP& lp, const SolveOptions& opt) : lp_(lp), opt_(opt) {}

  LPSolution run();

 private:
  bool preprocess(LPSolution& out);
  void apply_bound(int j, bool upper, double value, int row, double coef);
  void setup();
  void crash();
  void reinvert();
  void compute_basic_x();
  bool is_infeasible(int k) const {
    return x_[k] < lo_[k] - ftol_ || x_[k] > up_[k] + ftol_;
  }
  void compute_reduced_costs(bool phase1);
  int choose_entering(int& dir) const;
  void pivot(int row, int col);
  void finish_optimal(LPSolution& out) const;
  void finish_infeasible(LPSolution& out) const;
  void finish_unbounded(LPSolution& out, int q, int dir) const;
  std::vector<double> row_duals(const std::vector<double>& basic_cost) const;

  const StandardFormLP& lp_;
  const SolveOptions& opt_;
  int n_ = 0;   // structurals
  int mg_ = 0;  // general rows
  int nv_ = 0;  // n_ + mg_
  double ftol_ = 0.0;

  std::vector<double> lo_, up_;  // per variable
  std::vector<int> lower_row_, upper_row_;
  std::vector<double> lower_coef_, upper_coef_;
  std::vector<int> gen_rows_;

  Eigen::SparseMatrix<double> m0_;  // [A_gen | I | b], column major
  RowMatrix t_;                     // B^-1 [A_gen | I | b]
  std::vector<int> head_;           // basic variable of each tableau row
  std::vector<VarState> state_;
  std::vector<double> x_, d_, cost_;
  std::vector<int> scratch_;
  bool bland_ = false;
  bool used_bland_ = false;
};

void Solver::apply_bound(int j, bool upper, double value, int row, double coef) {
  const bool eq = lp_.sense[static_cast<size_t>(row)] == RowSense::Equal;
  auto& cur_row = upper ? upper_row_[j] : lower_row_[j];
  auto& cur_val = upper ? up_[j] : lo_[j];
  auto& cur_coef = upper ? upper_coef_[j] : lower_coef_[j];
  bool take = cur_row < 0 || (upper ? value < cur_val : value > cur_val);
  if (!take && value == cur_val && eq &&
      lp_.sense[static_cast<size_t>(cur_row)] != RowSense::Equal)
    take = true;
  if (!take) return;
  cur_row = row;
  cur_val = value;
  cur_coef = coef;
}

// Returns false (and fills `out`) when infeasibility is detected while
// folding empty and single-entry rows.
bool Solver::preprocess(LPSolution& out) {
  const int m = lp_.num_rows();
  n_ = lp_.num_cols();
  lo_.assign(static_cast<size_t>(n_), -kInf);
  up_.assign(static_cast<size_t>(n_), kInf);
  lower_row_.assign(static_cast<size_t>(n_), -1);
  upper_row_.assign(static_cast<size_t>(n_), -1);
  lower_coef_.assign(static_cast<size_t>(n_), 0.0);
  upper_coef_.assign(static_cast<size_t>(n_), 0.0);

  double bscale = 1.0;
  for (double b : lp_.rhs) bscale = std::max(bscale, std::abs(b));
  ftol_ = opt_.feasibility_tol * bscale;

  auto infeasible = [&](std::vector<std::pair<int, double>> cert) {
    out.status = SolveStatus::Infeasible;
    out.x.assign(static_cast<size_t>(n_), 0.0);
    out.duals.assign(static_cast<size_t>(m), 0.0);
    out.certificate.assign(static_cast<size_t>(m), 0.0);
    for (auto [i, v] : cert) out.certificate[static_cast<size_t>(i)] = v;
    return false;
  };

  for (int i = 0; i < m; ++i) {
    int nnz = 0, col = -1;
    double coef = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lp_.A, i); it; ++it) {
      if (it.value() == 0.0) continue;
      ++nnz;
      col = static_cast<int>(it.col());
      coef = it.value();
    }
    const double b = lp_.rhs[static_cast<size_t>(i)];
    const bool eq = lp_.sense[static_cast<size_t>(i)] == RowSense::Equal;
    if (nnz == 0) {
      if (eq && std::abs(b) > ftol_) return infeasible({{i, b > 0 ? -1.0 : 1.0}});
      if (!eq && b < -ftol_) return infeasible({{i, 1.0}});
    } else if (nnz == 1) {
      const double v = b / coef;
      if (eq) {
        apply_bound(col, false, v, i, coef);
        apply_bound(col, true, v, i, coef);
      } else {
        apply_bound(col, coef > 0.0, v, i, coef);
      }
    } else {
      gen_rows_.push_back(i);
    }
  }

  for (int j = 0; j < n_; ++j) {
    if (lo_[j] <= up_[j]) continue;
    if (lo_[j] > up_[j] + ftol_) {
      // a_u x <= b_u and a_l x <= b_l with b_u/a_u < b_l/a_l.
      return infeasible({{upper_row_[j], 1.0 / upper_coef_[j]},
                         {lower_row_[j], -1.0 / lower_coef_[j]}});
    }
    up_[j] = lo_[j];
  }
  return true;
}

void Solver::setup() {
  mg_ = static_cast<int>(gen_rows_.size());
  nv_ = n_ + mg_;
  lo_.resize(static_cast<size_t>(nv_), 0.0);
  up_.resize(static_cast<size_t>(nv_), 0.0);
  for (int r = 0; r < mg_; ++r)
    up_[n_ + r] = lp_.sense[static_cast<size_t>(gen_rows_[r])] == RowSense::Equal ? 0.0 : kInf;

  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < mg_; ++r) {
    const int i = gen_rows_[r];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lp_.A, i); it; ++it)
      if (it.value() != 0.0) trip.emplace_back(r, static_cast<int>(it.col()), it.value());
    trip.emplace_back(r, n_ + r, 1.0);
    const double b = lp_.rhs[static_cast<size_t>(i)];
    if (b != 0.0) trip.emplace_back(r, nv_, b);
  }
  m0_.resize(mg_, nv_ + 1);
  m0_.setFromTriplets(trip.begin(), trip.end());
  t_ = RowMatrix(m0_);

  cost_.assign(static_cast<size_t>(nv_), 0.0);
  std::copy(lp_.cost.begin(), lp_.cost.end(), cost_.begin());

  head_.resize(static_cast<size_t>(mg_));
  state_.assign(static_cast<size_t>(nv_), VarState::AtLower);
  x_.assign(static_cast<size_t>(nv_), 0.0);
  for (int r = 0; r < mg_; ++r) {
    head_[r] = n_ + r;
    state_[n_ + r] = VarState::Basic;
  }
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j])) {
      state_[j] = VarState::AtLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(up_[j])) {
      state_[j] = VarState::AtUpper;
      x_[j] = up_[j];
    } else {
      state_[j] = VarState::FreeZero;
    }
  }
}

void Solver::pivot(int row, int col) {
  if (opt_.parallel_pivot)
    kernels::pivot_parallel(t_.data(), mg_, nv_ + 1, row, col, scratch_);
  else
    kernels::pivot_serial(t_.data(), mg_, nv_ + 1, row, col, scratch_);
}

// Brings free structurals into the basis in place of logicals.
void Solver::crash() {
  for (int j = 0; j < n_; ++j) {
    if (state_[j] != VarState::FreeZero) continue;
    int best = -1;
    double best_abs = opt_.pivot_tol;
    for (int r = 0; r < mg_; ++r) {
      if (head_[r] < n_) continue;
      const double a = std::abs(t_(r, j));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (best < 0) continue;
    state_[head_[best]] = VarState::AtLower;
    x_[head_[best]] = 0.0;
    pivot(best, j);
    head_[best] = j;
    state_[j] = VarState::Basic;
  }
}

void Solver::reinvert() {
  if (mg_ == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < mg_; ++r)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m0_, head_[r]); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), r, it.value());
  Eigen::SparseMatrix<double> basis(mg_, mg_);
  basis.setFromTriplets(trip.begin(), trip.end());
  basis.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(basis);
  if (lu.info() != Eigen::Success) throw NumericalFailure("simplex basis became singular");
  Eigen::MatrixXd rhs(m0_);
  Eigen::MatrixXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalFailure("simplex basis solve failed");
  t_ = sol;
  for (Eigen::Index i = 0; i < t_.size(); ++i)
    if (std::abs(t_.data()[i]) < 1e-14) t_.data()[i] = 0.0;
  for (int r = 0; r < mg_; ++r) {
    for (int s = 0; s < mg_; ++s) t_(s, head_[r]) = 0.0;
    t_(r, head_[r]) = 1.0;
  }
}

void Solver::compute_basic_x() {
  std::vector<int> active;
  for (int k = 0; k < nv_; ++k)
    if (state_[k] != VarState::Basic && x_[k] != 0.0) active.push_back(k);
  for (int r = 0; r < mg_; ++r) {
    double v = t_(r, nv_);
    for (int k : active) v -= t_(r, k) * x_[k];
    x_[head_[r]] = v;
  }
}

void Solver::compute_reduced_costs(bool phase1) {
  d_.assign(static_cast<size_t>(nv_), 0.0);
  if (!phase1) d_ = cost_;
  for (int r = 0; r < mg_; ++r) {
    const int k = head_[r];
    double w;
    if (phase1)
      w = x_[k] < lo_[k] - ftol_ ? -1.0 : (x_[k] > up_[k] + ftol_ ? 1.0 : 0.0);
    else
      w = cost_[k];
    if (w == 0.0) continue;
    const double* row = t_.data() + static_cast<std::ptrdiff_t>(r) * (nv_ + 1);
    for (int j = 0; j < nv_; ++j)
      if (row[j] != 0.0) d_[j] -= w * row[j];
  }
  for (int r = 0; r < mg_; ++r) d_[head_[r]] = 0.0;
}

int Solver::choose_entering(int& dir) const {
  const double tol = opt_.optimality_tol;
  int best = -1;
  double best_abs = 0.0;
  for (int k = 0; k < nv_; ++k) {
    const VarState s = state_[k];
    if (s == VarState::Basic || lo_[k] == up_[k]) continue;
    const double dk = d_[k];
    int kdir = 0;
    if (s == VarState::AtLower && dk < -tol) kdir = 1;
    else if (s == VarState::AtUpper && dk > tol) kdir = -1;
    else if (s == VarState::FreeZero && std::abs(dk) > tol) kdir = dk < 0 ? 1 : -1;
    if (kdir == 0) continue;
    if (bland_) {
      dir = kdir;
      return k;
    }
    if (std::abs(dk) > best_abs) {
      best_abs = std::abs(dk);
      best = k;
      dir = kdir;
    }
  }
  return best;
}

std::vector<double> Solver::row_duals(const std::vector<double>& basic_cost) const {
  std::vector<double> y(static_cast<size_t>(mg_), 0.0);
  for (int r = 0; r < mg_; ++r) {
    if (basic_cost[r] == 0.0) continue;
    for (int s = 0; s < mg_; ++s) y[s] += basic_cost[r] * t_(r, n_ + s);
  }
  return y;
}

void Solver::finish_optimal(LPSolution& out) const {
  const int m = lp_.num_rows();
  out.status = SolveStatus::Optimal;
  out.x.assign(x_.begin(), x_.begin() + n_);
  for (int j = 0; j < n_; ++j) {
    if (state_[j] == VarState::AtLower) out.x[j] = lo_[j];
    else if (state_[j] == VarState::AtUpper) out.x[j] = up_[j];
  }
  out.duals.assign(static_cast<size_t>(m), 0.0);

  std::vector<double> cb(static_cast<size_t>(mg_));
  for (int r = 0; r < mg_; ++r) cb[r] = cost_[head_[r]];
  const auto y = row_duals(cb);
  std::vector<char> defining(static_cast<size_t>(m), 0);
  for (int r = 0; r < mg_; ++r) {
    out.duals[gen_rows_[r]] = -y[r];
    if (state_[n_ + r] != VarState::Basic) defining[gen_rows_[r]] = 1;
  }
  for (int j = 0; j < n_; ++j) {
    const VarState s = state_[j];
    if (s == VarState::Basic || s == VarState::FreeZero) continue;
    const double dj = d_[j];
    bool use_upper = s == VarState::AtUpper;
    if (lo_[j] == up_[j]) use_upper = dj < 0.0;
    const int row = use_upper ? upper_row_[j] : lower_row_[j];
    const double coef = use_upper ? upper_coef_[j] : lower_coef_[j];
    out.duals[row] = -dj / coef;
    defining[row] = 1;
  }

  out.objective = 0.0;
  for (int j = 0; j < n_; ++j) out.objective += lp_.cost[j] * out.x[j];
  out.defining_rows.clear();
  out.basis.clear();
  for (int j = 0; j < n_; ++j)
    if (state_[j] == VarState::Basic) out.basis.push_back(j);
  for (int i = 0; i < m; ++i) {
    if (defining[i]) out.defining_rows.push_back(i);
    else out.basis.push_back(n_ + i);
  }
}

// Farkas weights from the phase-1 duals. Bound rows absorb the residual of
// each column so that A'y = 0 holds over the original rows.
void Solver::finish_infeasible(LPSolution& out) const {
  const int m = lp_.num_rows();
  out.status = SolveStatus::Infeasible;
  out.x.assign(x_.begin(), x_.begin() + n_);
  out.duals.assign(static_cast<size_t>(m), 0.0);
  out.certificate.assign(static_cast<size_t>(m), 0.0);

  std::vector<double> cb(static_cast<size_t>(mg_));
  for (int r = 0; r < mg_; ++r) {
    const int k = head_[r];
    cb[r] = x_[k] < lo_[k] - ftol_ ? -1.0 : (x_[k] > up_[k] + ftol_ ? 1.0 : 0.0);
  }
  const auto y = row_duals(cb);
  std::vector<double> resid(static_cast<size_t>(n_), 0.0);
  for (int r = 0; r < mg_; ++r) {
    out.certificate[gen_rows_[r]] = -y[r];
    if (y[r] == 0.0) continue;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lp_.A, gen_rows_[r]); it;
         ++it)
      resid[it.col()] += y[r] * it.value();
  }
  for (int j = 0; j < n_; ++j) {
    const double rj = resid[j];
    if (std::abs(rj) <= 1e-12) continue;
    if (rj < 0.0 && lower_row_[j] >= 0)
      out.certificate[lower_row_[j]] += rj / lower_coef_[j];
    else if (rj > 0.0 && upper_row_[j] >= 0)
      out.certificate[upper_row_[j]] += rj / upper_coef_[j];
  }
}

void Solver::finish_unbounded(LPSolution& out, int q, int dir) const {
  out.status = SolveStatus::Unbounded;
  out.x.assign(x_.begin(), x_.begin() + n_);
  out.duals.assign(static_cast<size_t>(lp_.num_rows()), 0.0);
  std::vector<double> ray(static_cast<size_t>(n_), 0.0);
  if (q < n_) ray[q] = dir;
  for (int r = 0; r < mg_; ++r)
    if (head_[r] < n_) ray[head_[r]] = -dir * t_(r, q);
  double scale = 0.0;
  for (double v : ray) scale = std::max(scale, std::abs(v));
  if (scale > 0.0)
    for (double& v : ray) v /= scale;
  out.certificate = std::move(ray);
}

LPSolution Solver::run() {
  lp_.check_dimensions();
  counters().lp_solves++;
  LPSolution out;
  if (!preprocess(out)) return out;
  setup();
  crash();
  reinvert();
  compute_basic_x();

  const long cap = opt_.max_iterations > 0 ? opt_.max_iterations : 20L * (mg_ + nv_) + 1000;
  long iter = 0;
  int since_reinvert = 0;
  int degenerate_streak = 0;
  bool fresh = true;
  bool phase2_valid = false;

  for (;;) {
    if (since_reinvert >= opt_.reinvert_every) {
      reinvert();
      compute_basic_x();
      since_reinvert = 0;
      phase2_valid = false;
      fresh = true;
    }
    bool phase1 = false;
    for (int r = 0; r < mg_ && !phase1; ++r) phase1 = is_infeasible(head_[r]);
    if (phase1) {
      compute_reduced_costs(true);
      phase2_valid = false;
    } else if (!phase2_valid) {
      compute_reduced_costs(false);
      phase2_valid = true;
    }

    int dir = 0;
    const int q = choose_entering(dir);
    if (q < 0) {
      if (!fresh) {
        since_reinvert = opt_.reinvert_every;
        continue;
      }
      if (phase1) finish_infeasible(out);
      else finish_optimal(out);
      break;
    }

    if (++iter > cap) throw NumericalFailure("simplex iteration limit reached");

    // Ratio test. Basic variable r moves at rate alpha_r per unit step.
    double theta = kInf;
    int leave = -1;
    bool leave_upper = false;
    double leave_alpha = 0.0;
    for (int r = 0; r < mg_; ++r) {
      const double a = -dir * t_(r, q);
      if (std::abs(a) <= opt_.pivot_tol) continue;
      const int k = head_[r];
      const double xv = x_[k];
      double lim;
      bool to_upper;
      if (phase1 && xv < lo_[k] - ftol_) {
        if (a < 0.0) continue;
        lim = (lo_[k] - xv) / a;
        to_upper = false;
      } else if (phase1 && xv > up_[k] + ftol_) {
        if (a > 0.0) continue;
        lim = (xv - up_[k]) / -a;
        to_upper = true;
      } else if (a < 0.0) {
        if (!std::isfinite(lo_[k])) continue;
        lim = (xv - lo_[k]) / -a;
        to_upper = false;
      } else {
        if (!std::isfinite(up_[k])) continue;
        lim = (up_[k] - xv) / a;
        to_upper = true;
      }
      lim = std::max(lim, 0.0);
      const double tie = 1e-11 * std::max(1.0, theta);
      bool take = false;
      if (leave < 0 || lim < theta - tie) {
        take = true;
      } else if (lim <= theta + tie) {
        take = bland_ ? k < head_[leave] : std::abs(a) > std::abs(leave_alpha);
      }
      if (take) {
        theta = std::min(lim, theta);
        leave = r;
        leave_upper = to_upper;
        leave_alpha = a;
      }
    }
    const double flip = dir > 0 ? up_[q] - x_[q] : x_[q] - lo_[q];

    if (leave < 0 && !std::isfinite(flip)) {
      if (!fresh) {
        since_reinvert = opt_.reinvert_every;
        continue;
      }
      if (phase1) throw NumericalFailure("unbounded ray during feasibility phase");
      finish_unbounded(out, q, dir);
      break;
    }

    const double step = std::min(theta, flip);
    for (int r = 0; r < mg_; ++r) {
      const double a = -dir * t_(r, q);
      if (a != 0.0) x_[head_[r]] += a * step;
    }
    if (flip <= theta) {
      x_[q] = dir > 0 ? up_[q] : lo_[q];
      state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
    } else {
      x_[q] += dir * step;
      const int k = head_[leave];
      const bool fixed = lo_[k] == up_[k];
      x_[k] = leave_upper && !fixed ? up_[k] : lo_[k];
      state_[k] = leave_upper && !fixed ? VarState::AtUpper : VarState::AtLower;
      pivot(leave, q);
      head_[leave] = q;
      state_[q] = VarState::Basic;
      if (!phase1 && phase2_valid) {
        const double dq = d_[q];
        const double* prow = t_.data() + static_cast<std::ptrdiff_t>(leave) * (nv_ + 1);
        for (int j = 0; j < nv_; ++j)
          if (prow[j] != 0.0) d_[j] -= dq * prow[j];
        d_[q] = 0.0;
      }
    }

    if (step <= 1e-12) {
      if (++degenerate_streak >= opt_.degenerate_streak_for_bland) {
        bland_ = true;
        used_bland_ = true;
      }
    } else {
      degenerate_streak = 0;
      bland_ = false;
    }
    ++since_reinvert;
    fresh = false;
  }
  out.iterations = iter;
  out.used_bland = used_bland_;
  return out;
}

}  // namespace

LPSolution solve(const StandardFormLP& lp, const SolveOptions& options) {
  Solver solver(lp, options);
  return solver.run();
}

}  // namespace co2i::lp
