#include "co2i/lp.hpp"

#include <algorithm>
#include <cmath>

namespace co2i::lp {

void StandardFormLP::check_dimensions() const {
  const auto m = static_cast<Eigen::Index>(rhs.size());
  const auto n = static_cast<Eigen::Index>(cost.size());
  if (A.rows() != m || A.cols() != n) throw std::logic_error("LP matrix shape mismatch");
  if (sense.size() != rhs.size()) throw std::logic_error("LP row sense count mismatch");
  if (!row_tags.empty() && row_tags.size() != rhs.size())
    throw std::logic_error("LP row tag count mismatch");
  if (!col_tags.empty() && col_tags.size() != cost.size())
    throw std::logic_error("LP column tag count mismatch");
}

std::vector<double> StandardFormLP::row_activity(const std::vector<double>& x) const {
  std::vector<double> ax(rhs.size(), 0.0);
  for (Eigen::Index i = 0; i < A.outerSize(); ++i)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, i); it; ++it)
      ax[static_cast<size_t>(i)] += it.value() * x[static_cast<size_t>(it.col())];
  return ax;
}

int LpBuilder::add_col(std::string tag, double cost) {
  cost_.push_back(cost);
  col_tags_.push_back(std::move(tag));
  return static_cast<int>(cost_.size()) - 1;
}

int LpBuilder::add_row(std::string tag, RowSense sense, double rhs,
                       const std::vector<std::pair<int, double>>& entries) {
  const int row = static_cast<int>(rhs_.size());
  for (const auto& [col, v] : entries) {
    if (col < 0 || col >= num_cols()) throw std::out_of_range("LP column index out of range");
    if (v != 0.0) triplets_.emplace_back(row, col, v);
  }
  rhs_.push_back(rhs);
  sense_.push_back(sense);
  row_tags_.push_back(std::move(tag));
  return row;
}

StandardFormLP LpBuilder::build() const {
  StandardFormLP lp;
  lp.cost = cost_;
  lp.rhs = rhs_;
  lp.sense = sense_;
  lp.row_tags = row_tags_;
  lp.col_tags = col_tags_;
  lp.A.resize(static_cast<Eigen::Index>(rhs_.size()), static_cast<Eigen::Index>(cost_.size()));
  lp.A.setFromTriplets(triplets_.begin(), triplets_.end());
  lp.A.makeCompressed();
  return lp;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

ActiveSet active_set(const StandardFormLP& lp, const LPSolution& sol, double tol) {
  ActiveSet out;
  const auto ax = lp.row_activity(sol.x);
  double bscale = 1.0;
  for (double b : lp.rhs) bscale = std::max(bscale, std::abs(b));
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto k = static_cast<size_t>(i);
    if (lp.sense[k] == RowSense::Equal || sol.duals[k] > tol) {
      out.rows.push_back(i);
    } else if (std::abs(ax[k] - lp.rhs[k]) <= 1e-9 * bscale) {
      out.tight_zero_dual.push_back(i);
    }
  }
  return out;
}

Certificate certify(const StandardFormLP& lp, const LPSolution& sol) {
  Certificate c;
  const auto ax = lp.row_activity(sol.x);
  std::vector<double> grad(lp.cost);
  double dual_obj = 0.0;
  for (Eigen::Index i = 0; i < lp.A.outerSize(); ++i) {
    const auto k = static_cast<size_t>(i);
    const double lam = sol.duals[k];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lp.A, i); it; ++it)
      grad[static_cast<size_t>(it.col())] += it.value() * lam;
    const double r = ax[k] - lp.rhs[k];
    if (lp.sense[k] == RowSense::Equal) {
      c.primal_infeasibility = std::max(c.primal_infeasibility, std::abs(r));
    } else {
      c.primal_infeasibility = std::max(c.primal_infeasibility, r);
      c.dual_sign_violation = std::max(c.dual_sign_violation, -lam);
    }
    c.complementary_slackness += std::abs(r * lam);
    dual_obj -= lp.rhs[k] * lam;
  }
  for (double g : grad) c.dual_residual = std::max(c.dual_residual, std::abs(g));
  double primal_obj = 0.0;
  for (size_t j = 0; j < lp.cost.size(); ++j) primal_obj += lp.cost[j] * sol.x[j];
  c.duality_gap = std::abs(primal_obj - dual_obj);
  return c;
}

Counters& counters() {
  static Counters instance;
  return instance;
}

}  // namespace co2i::lp
