#include <string>

#include "co2i/lp.hpp"

namespace co2i::lp {

BasisFactorization::BasisFactorization(const StandardFormLP& lp, const LPSolution& sol) {
  if (sol.status != SolveStatus::Optimal)
    throw SingularBasis("basis requested for a non-optimal solution");
  const int n = lp.num_cols();
  rows_ = sol.defining_rows;
  if (static_cast<int>(rows_.size()) != n)
    throw SingularBasis("vertex is not fully determined: " + std::to_string(rows_.size()) +
                        " defining rows for " + std::to_string(n) + " columns");
  position_.assign(static_cast<size_t>(lp.num_rows()), -1);
  std::vector<Eigen::Triplet<double>> trip;
  for (int p = 0; p < n; ++p) {
    const int i = rows_[static_cast<size_t>(p)];
    position_[static_cast<size_t>(i)] = p;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lp.A, i); it; ++it)
      trip.emplace_back(p, static_cast<int>(it.col()), it.value());
  }
  Eigen::SparseMatrix<double> ad(n, n);
  ad.setFromTriplets(trip.begin(), trip.end());
  ad.makeCompressed();
  counters().basis_factorizations++;
  lu_.analyzePattern(ad);
  lu_.factorize(ad);
  if (lu_.info() != Eigen::Success) throw SingularBasis("defining system is singular");
}

Eigen::VectorXd BasisFactorization::solve(const SparseRhs& delta_b) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size());
  for (const auto& [row, v] : delta_b) {
    if (row < 0 || row >= static_cast<int>(position_.size()) || position_[row] < 0)
      throw std::invalid_argument("perturbed row " + std::to_string(row) +
                                  " is not part of the defining system");
    rhs[position_[row]] += v;
  }
  // Only reads the factors, so concurrent calls are safe.
  return lu_.solve(rhs);
}

Eigen::VectorXd BasisFactorization::solve_dense(const Eigen::VectorXd& rhs) const {
  return lu_.solve(rhs);
}

Eigen::VectorXd BasisFactorization::solve_transposed(const Eigen::VectorXd& rhs) const {
  return lu_.transpose().solve(rhs);
}

Eigen::VectorXd basis_solve(const StandardFormLP& lp, const LPSolution& sol,
                            const SparseRhs& delta_b) {
  return BasisFactorization(lp, sol).solve(delta_b);
}

}  // namespace co2i::lp
