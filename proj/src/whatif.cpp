#include "co2i/whatif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace co2i {

const char* to_string(WhatIfMethod method) {
  return method == WhatIfMethod::BasisSolve ? "basis" : "fd";
}

int WhatIfResult::entry_count() const {
  int n = 0;
  for (const auto& row : entries)
    for (const auto& e : row) n += e.has_value();
  return n;
}

int WhatIfResult::degenerate_count() const {
  int n = 0;
  for (const auto& row : entries)
    for (const auto& e : row) n += e && e->degenerate;
  return n;
}

int WhatIfResult::fallback_count() const {
  int n = 0;
  for (const auto& row : entries)
    for (const auto& e : row) n += e && e->method == WhatIfMethod::FiniteDifference;
  return n;
}

bool fd_agrees(double a, double b) { return std::abs(a - b) <= std::max(1e-6, 1e-4 * std::abs(a)); }

double fd_step(const EnergySystem& system, int c, const WhatIfOptions& options) {
  const auto& co = system.commodities[c].id;
  double peak = 0.0;
  for (const auto& p : system.processes)
    if (p.kind == ProcessKind::Demand && p.inputs[0] == co)
      for (double d : system.demand_of(p)) peak = std::max(peak, d);
  return options.fd_rel_step * (peak > 0.0 ? peak : 1.0);
}

double perturbed_m_tot(const DispatchResult& dispatch, int c, int t, double delta,
                       const lp::SolveOptions& options) {
  const int row = dispatch.index.demand_fix[c][t];
  if (row < 0) throw std::invalid_argument("no demand at the requested entry");
  lp::StandardFormLP lp = dispatch.lp;
  lp.rhs[row] += delta;
  auto sol = lp::solve(lp, options);
  if (sol.status != lp::SolveStatus::Optimal)
    throw InfeasiblePerturbation("re-dispatch with demand of " + lp.row_tags[row] + " shifted by " +
                                 std::to_string(delta) + " GWh is " + lp::to_string(sol.status));
  return sol.x[dispatch.index.m_tot];
}

double forward_difference(const DispatchResult& dispatch, int c, int t, double eps,
                          const lp::SolveOptions& options) {
  // t / GWh -> t / MWh
  return (perturbed_m_tot(dispatch, c, t, eps, options) - dispatch.M_tot) / eps / 1000.0;
}

FiniteDifference finite_difference(const DispatchResult& dispatch, int c, int t, double eps,
                                   const WhatIfOptions& options) {
  FiniteDifference fd;
  fd.forward = forward_difference(dispatch, c, t, eps, options.lp);
  try {
    fd.backward = (dispatch.M_tot - perturbed_m_tot(dispatch, c, t, -eps, options.lp)) / eps / 1000.0;
    fd.degenerate = std::abs(*fd.backward - fd.forward) > options.tol_deg;
  } catch (const InfeasiblePerturbation&) {
  }
  return fd;
}

namespace {

struct Job {
  int c, t;
};

std::vector<Job> demand_entries(const DispatchResult& dispatch) {
  std::vector<Job> jobs;
  const auto& df = dispatch.index.demand_fix;
  for (int c = 0; c < static_cast<int>(df.size()); ++c)
    for (int t = 0; t < static_cast<int>(df[c].size()); ++t)
      if (df[c][t] >= 0) jobs.push_back({c, t});
  return jobs;
}

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

double row_dot(const RowMatrix& A, int i, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (RowMatrix::InnerIterator it(A, i); it; ++it) v += it.value() * x[it.col()];
  return v;
}

Eigen::VectorXd dense_row(const RowMatrix& A, int i, double scale) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(A.cols());
  for (RowMatrix::InnerIterator it(A, i); it; ++it) r[it.col()] = scale * it.value();
  return r;
}

// Rows tight at the optimum (equalities included) outside the defining
// system. A perturbation direction must keep these satisfied.
std::vector<int> tight_rows(const DispatchResult& d, const lp::BasisFactorization& f) {
  std::vector<int> rows;
  const auto ax = d.lp.row_activity(d.sol.x);
  double bscale = 1.0;
  for (double b : d.lp.rhs) bscale = std::max(bscale, std::abs(b));
  for (int i = 0; i < d.lp.num_rows(); ++i) {
    if (f.contains(i)) continue;
    if (d.lp.sense[i] == lp::RowSense::Equal || std::abs(ax[i] - d.lp.rhs[i]) <= 1e-9 * bscale)
      rows.push_back(i);
  }
  return rows;
}

// The defining system with some rows replaced, solved through the shared
// factorization plus one Sherman-Morrison correction per replacement.
class UpdatedBasis {
 public:
  explicit UpdatedBasis(const lp::BasisFactorization& f) : f_(f) {}

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = f_.solve_dense(rhs);
    for (const auto& e : etas_) x -= e.y * (e.u.dot(x) / e.den);
    return x;
  }

  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = f_.solve_transposed(rhs);
    for (const auto& e : etas_) x -= e.z * (x[e.pos] / e.den);
    return x;
  }

  // Row at `pos` becomes old + u. False if the result is near singular.
  bool replace(int pos, Eigen::VectorXd u) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(f_.size());
    unit[pos] = 1.0;
    Eta e{pos, std::move(u), solve(unit), {}, 0.0};
    e.z = solve_transposed(e.u);
    e.den = 1.0 + e.u.dot(e.y);
    if (std::abs(e.den) < 1e-10) return false;
    etas_.push_back(std::move(e));
    return true;
  }

 private:
  struct Eta {
    int pos;
    Eigen::VectorXd u, y, z;
    double den;
  };
  const lp::BasisFactorization& f_;
  std::vector<Eta> etas_;
};

struct Vertex {
  const DispatchResult& d;
  const lp::BasisFactorization& f;
  std::vector<int> tight;
  std::vector<double> row_norm;
};

// Solves the local LP  min c'dx  s.t. rows of the defining system and tight
// rows kept satisfied, with the perturbed demand row moved by `sign`, by dual
// simplex from the optimal duals. Returns dx, or nothing when the direction
// is infeasible or the pivot limit is hit.
std::optional<Eigen::VectorXd> directional(const Vertex& v, int demand_row, double sign,
                                           const WhatIfOptions& o, int& pivots) {
  const auto& A = v.d.lp.A;
  const int n = v.f.size();
  std::vector<int> rows = v.f.rows();
  std::vector<char> in_d(static_cast<size_t>(v.d.lp.num_rows()), 0);
  for (int i : rows) in_d[i] = 1;
  Eigen::VectorXd lambda(n);
  for (int k = 0; k < n; ++k) lambda[k] = v.d.sol.duals[rows[k]];

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[v.f.position(demand_row)] = sign;
  UpdatedBasis basis(v.f);
  pivots = 0;
  for (;;) {
    const Eigen::VectorXd dx = basis.solve(rhs);
    const double tol = o.ray_tol * std::max(1.0, dx.lpNorm<Eigen::Infinity>());
    int q = -1;
    double worst = 0.0, q_sign = 1.0;
    for (int i : v.tight) {
      if (in_d[i]) continue;
      const double s = row_dot(A, i, dx);
      const bool eq = v.d.lp.sense[i] == lp::RowSense::Equal;
      const double viol = (eq ? std::abs(s) : s) / v.row_norm[i];
      if (viol > tol && viol > worst) {
        worst = viol;
        q = i;
        q_sign = s > 0.0 ? 1.0 : -1.0;
      }
    }
    if (q < 0) return dx;
    if (pivots == o.max_pivots) return std::nullopt;

    // Bring q into the system; the leaving row keeps the duals feasible.
    const Eigen::VectorXd aq = dense_row(A, q, q_sign);
    const Eigen::VectorXd w = basis.solve_transposed(aq);
    const double wmax = w.lpNorm<Eigen::Infinity>();
    int leave = -1;
    double ratio = 0.0;
    for (int k = 0; k < n; ++k) {
      const int r = rows[k];
      if (v.d.lp.sense[r] == lp::RowSense::Equal || w[k] <= 1e-9 * wmax) continue;
      const double rk = std::max(0.0, lambda[k]) / w[k];
      if (leave < 0 || rk < ratio - 1e-12 || (rk <= ratio + 1e-12 && w[k] > w[leave])) {
        leave = k;
        ratio = rk;
      }
    }
    if (leave < 0) return std::nullopt;  // demand shift cannot be served
    lambda -= ratio * w;
    lambda[leave] = ratio;
    if (!basis.replace(leave, aq - dense_row(A, rows[leave], 1.0))) return std::nullopt;
    in_d[rows[leave]] = 0;
    in_d[q] = 1;
    rows[leave] = q;
    ++pivots;
  }
}

void fallback(const DispatchResult& d, const Job& j, double eps, const WhatIfOptions& o,
              WhatIfEntry& e) {
  e.method = WhatIfMethod::FiniteDifference;
  try {
    const auto fd = finite_difference(d, j.c, j.t, eps, o);
    e.fd_forward = fd.forward;
    e.fd_backward = fd.backward;
    e.degenerate = fd.degenerate;
    e.value = fd.forward;
  } catch (const InfeasiblePerturbation&) {
    e.value = std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

WhatIfResult compute_whatif(const EnergySystem& system, const DispatchResult& dispatch,
                            const WhatIfOptions& options) {
  if (dispatch.sol.status != lp::SolveStatus::Optimal)
    throw std::invalid_argument("what-if analysis needs an optimal dispatch");
  const long solves0 = lp::counters().lp_solves;
  const long facts0 = lp::counters().basis_factorizations;

  const int nc = static_cast<int>(system.commodities.size());
  WhatIfResult res;
  res.entries.assign(nc, std::vector<std::optional<WhatIfEntry>>(system.horizon));
  res.fd_step.resize(nc);
  for (int c = 0; c < nc; ++c) res.fd_step[c] = fd_step(system, c, options);

  const auto jobs = demand_entries(dispatch);
  std::unique_ptr<lp::BasisFactorization> basis;
  try {
    basis = std::make_unique<lp::BasisFactorization>(dispatch.lp, dispatch.sol);
  } catch (const lp::SingularBasis&) {
  }
  std::unique_ptr<Vertex> vertex;
  if (basis) {
    vertex.reset(new Vertex{dispatch, *basis, tight_rows(dispatch, *basis), {}});
    vertex->row_norm.assign(static_cast<size_t>(dispatch.lp.num_rows()), 1.0);
    for (int i : vertex->tight) vertex->row_norm[i] = std::max(1e-12, dispatch.lp.A.row(i).norm());
  }

  const int n = static_cast<int>(jobs.size());
  std::vector<WhatIfEntry> out(static_cast<size_t>(n));
  auto work = [&](int k) {
    const Job& j = jobs[k];
    WhatIfEntry& e = out[k];
    if (vertex) {
      const int row = dispatch.index.demand_fix[j.c][j.t];
      e.basis_value = basis->solve({{row, 1.0}})[dispatch.index.m_tot] / 1000.0;
      int pivots = 0;
      if (const auto fwd = directional(*vertex, row, 1.0, options, pivots)) {
        e.pivots = pivots;
        e.value = (*fwd)[dispatch.index.m_tot] / 1000.0;
        // Demand cannot go below zero, so there is no left derivative there.
        if (dispatch.lp.rhs[row] > 0.0)
          if (const auto bwd = directional(*vertex, row, -1.0, options, pivots)) {
            e.backward = -(*bwd)[dispatch.index.m_tot] / 1000.0;
            e.degenerate = std::abs(*e.backward - e.value) > options.tol_deg;
          }
        return;
      }
    }
    fallback(dispatch, j, res.fd_step[j.c], options, e);
  };
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) work(k);
  } else {
    for (int k = 0; k < n; ++k) work(k);
  }
  for (int k = 0; k < n; ++k) res.entries[jobs[k].c][jobs[k].t] = out[k];

  res.lp_solves = lp::counters().lp_solves - solves0;
  res.factorizations = lp::counters().basis_factorizations - facts0;
  return res;
}

FdCheckResult fd_check([[maybe_unused]] const EnergySystem& system, const DispatchResult& dispatch,
                       WhatIfResult& whatif, int sample, const WhatIfOptions& options) {
  const long solves0 = lp::counters().lp_solves;
  auto jobs = demand_entries(dispatch);
  if (sample > 0 && sample < static_cast<int>(jobs.size())) {
    std::vector<Job> picked;
    const double stride = static_cast<double>(jobs.size()) / sample;
    for (int k = 0; k < sample; ++k) picked.push_back(jobs[static_cast<size_t>(k * stride)]);
    jobs = std::move(picked);
  }
  const int n = static_cast<int>(jobs.size());
  FdCheckResult res;
  res.entries.resize(static_cast<size_t>(n));

  auto work = [&](int k) {
    const Job& j = jobs[k];
    FdCheckEntry& ce = res.entries[k];
    const WhatIfEntry& e = *whatif.entries[j.c][j.t];
    ce.commodity = j.c;
    ce.t = j.t;
    ce.basis = e.value;
    const double eps = whatif.fd_step[j.c];
    if (std::isnan(e.value)) {  // demand increase infeasible either way
      ce.forward = e.value;
      return;
    }
    if (e.fd_forward) {
      ce.forward = *e.fd_forward;  // already evaluated by the fallback
      ce.backward = e.fd_backward;
      ce.degenerate = e.degenerate;
      ce.agrees = true;
      return;
    }
    ce.forward = forward_difference(dispatch, j.c, j.t, eps, options.lp);
    ce.agrees = fd_agrees(ce.basis, ce.forward);
    if (ce.agrees) return;
    try {
      ce.backward = (dispatch.M_tot - perturbed_m_tot(dispatch, j.c, j.t, -eps, options.lp)) / eps /
                    1000.0;
    } catch (const InfeasiblePerturbation&) {
    }
    ce.degenerate = ce.backward && std::abs(*ce.backward - ce.forward) > options.tol_deg;
    ce.agrees = ce.degenerate;
  };
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) work(k);
  } else {
    for (int k = 0; k < n; ++k) work(k);
  }

  for (const auto& ce : res.entries) {
    auto& e = *whatif.entries[ce.commodity][ce.t];
    if (!e.fd_forward) {
      e.fd_forward = ce.forward;
      e.fd_backward = ce.backward;
    }
    if (ce.degenerate) {
      ++res.degenerate;
      if (!e.degenerate) {
        e.degenerate = true;
        e.method = WhatIfMethod::FiniteDifference;
        e.value = ce.forward;
      }
    } else {
      res.max_abs_delta = std::max(res.max_abs_delta, std::abs(ce.basis - ce.forward));
    }
    if (!ce.agrees) ++res.disagreements;
  }
  res.lp_solves = lp::counters().lp_solves - solves0;
  return res;
}

}  // namespace co2i
