#pragma once

// Marginal ("what-if") CO2 intensities dM_tot/dD(co,t) of an optimal
// dispatch. The primary path differentiates the optimal vertex: one sparse
// factorization of the vertex-defining rows serves every demand entry. Where
// the vertex does not survive the perturbation (degenerate optima), a few
// dual pivots on the tight rows, applied as rank-one updates of the same
// factorization, give the exact one-sided derivative. A re-optimizing
// finite-difference oracle is the fallback and the check.

#include <optional>
#include <stdexcept>
#include <vector>

#include "co2i/dispatch.hpp"

namespace co2i {

enum class WhatIfMethod { BasisSolve, FiniteDifference };
const char* to_string(WhatIfMethod method);

struct WhatIfEntry {
  double value = 0.0;  // t/MWh
  WhatIfMethod method = WhatIfMethod::BasisSolve;
  std::optional<double> basis_value;  // plain solve on the optimal vertex
  std::optional<double> backward;     // left derivative; absent at zero demand
  std::optional<double> fd_forward;
  std::optional<double> fd_backward;
  bool degenerate = false;  // one-sided derivatives differ by more than tol_deg
  int pivots = 0;           // dual pivots needed for the forward derivative
};

struct WhatIfOptions {
  double tol_deg = 1e-6;       // t/MWh
  double fd_rel_step = 1e-4;   // times the peak demand of the commodity
  double ray_tol = 1e-9;
  int max_pivots = 50;  // per direction, then finite differences
  bool parallel = false;
  lp::SolveOptions lp;
};

struct WhatIfResult {
  /// [commodity][t]; empty optional where the commodity has no demand process.
  std::vector<std::vector<std::optional<WhatIfEntry>>> entries;
  std::vector<double> fd_step;  // GWh per commodity
  long lp_solves = 0;           // during this computation
  long factorizations = 0;

  int entry_count() const;
  int degenerate_count() const;
  int fallback_count() const;
};

class InfeasiblePerturbation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

WhatIfResult compute_whatif(const EnergySystem& system, const DispatchResult& dispatch,
                            const WhatIfOptions& options = {});

/// Step used by the finite-difference oracle for commodity index c.
double fd_step(const EnergySystem& system, int c, const WhatIfOptions& options = {});

/// M_tot of the dispatch re-optimized with demand of (c,t) shifted by delta
/// [GWh]. Throws InfeasiblePerturbation.
double perturbed_m_tot(const DispatchResult& dispatch, int c, int t, double delta,
                       const lp::SolveOptions& options = {});

/// (M_tot(D + eps e_ct) - M_tot(D)) / eps in t/MWh, by full re-dispatch.
double forward_difference(const DispatchResult& dispatch, int c, int t, double eps,
                          const lp::SolveOptions& options = {});

struct FiniteDifference {
  double forward = 0.0;
  std::optional<double> backward;  // absent when D - eps is infeasible
  bool degenerate = false;
};

/// Forward and backward differences; degenerate when they differ by more
/// than tol_deg.
FiniteDifference finite_difference(const DispatchResult& dispatch, int c, int t, double eps,
                                   const WhatIfOptions& options = {});

struct FdCheckEntry {
  int commodity = 0;
  int t = 0;
  double basis = 0.0;
  double forward = 0.0;
  std::optional<double> backward;
  bool degenerate = false;
  bool agrees = true;  // |basis - forward| <= max(1e-6, 1e-4 |basis|), or degenerate
};

struct FdCheckResult {
  std::vector<FdCheckEntry> entries;
  long lp_solves = 0;
  double max_abs_delta = 0.0;  // over non-degenerate entries
  int degenerate = 0;
  int disagreements = 0;
};

/// Checks what-if values against forward differences. `sample` > 0 checks
/// an evenly spaced subset of that many entries. Backward differences are
/// only evaluated where forward and basis values disagree. Entries of
/// `whatif` found degenerate are updated to the forward value.
FdCheckResult fd_check(const EnergySystem& system, const DispatchResult& dispatch,
                       WhatIfResult& whatif, int sample = 0, const WhatIfOptions& options = {});

/// True when |a - b| <= max(1e-6, 1e-4 |a|).
bool fd_agrees(double a, double b);

}  // namespace co2i
