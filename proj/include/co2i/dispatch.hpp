#pragma once

// Economic dispatch of an EnergySystem as a linear program, and the flow
// data it produces.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "co2i/lp.hpp"
#include "co2i/system_model.hpp"

namespace co2i {

/// Energy flows per step [GWh], indexed [process][input or output slot][t].
/// Storage levels are indexed [process][t] and empty for non-storage
/// processes. Works for dispatch results and for observed data alike.
struct FlowData {
  std::vector<std::vector<std::vector<double>>> E_in;
  std::vector<std::vector<std::vector<double>>> E_out;
  std::vector<std::vector<double>> SL;

  static FlowData zeros(const EnergySystem& system);
  double input_total(int p, int t) const;
  double output_total(int p, int t) const;
  /// Sum over processes of the output of commodity `co` at step t.
  double production(const EnergySystem& system, const std::string& co, int t) const;
};

/// Column and row positions of the dispatch LP. -1 marks absent entries.
struct DispatchIndex {
  std::vector<std::vector<std::vector<int>>> e_in;   // [p][slot][t]
  std::vector<std::vector<std::vector<int>>> e_out;  // [p][slot][t]
  std::vector<std::vector<int>> sl;                  // [p][t]
  int m_tot = -1;
  std::vector<std::vector<int>> energy_balance;      // [commodity][t]
  std::vector<std::vector<int>> demand_fix;          // [commodity][t], first demand process
  int co2_row = -1;
  std::vector<char> perturbed_col;                   // tie-break applied
};

struct DispatchModel {
  lp::StandardFormLP lp;
  DispatchIndex index;
  std::map<std::string, int> row_index;
  std::vector<double> base_cost;  // objective without tie-break
};

struct DispatchOptions {
  /// Relative size of the deterministic cost perturbation that singles out
  /// one optimum among equal-cost dispatches. 0 disables it.
  double tie_break = 1e-9;
  lp::SolveOptions lp;
};

/// Builds the dispatch LP. Row tags: EnergyBalance(co,t), ProcessBalance(cp,co,t),
/// FlexMax/FlexMin(cp,co,t), Capacity(cp,co,t), StorageBalance(cp,t),
/// StorageCapacity(cp,t), DemandFix(co,t), NonNeg(<column>), CO2Balance.
DispatchModel build_model(const EnergySystem& system, const DispatchOptions& options = {});
lp::StandardFormLP build_lp(const EnergySystem& system);

struct DispatchResult {
  FlowData flows;
  double M_tot = 0.0;  // t
  double cost = 0.0;   // without tie-break
  double tie_break_scale = 0.0;
  lp::StandardFormLP lp;
  lp::LPSolution sol;
  DispatchIndex index;
  std::map<std::string, int> row_index;
};

class InfeasibleSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnboundedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validates, builds and solves. Throws ValidationError, InfeasibleSystem,
/// UnboundedModel or lp::NumericalFailure.
DispatchResult solve_dispatch(const EnergySystem& system, const DispatchOptions& options = {});

/// Reads flows back from a primal vector of the dispatch LP.
FlowData extract_flows(const EnergySystem& system, const DispatchIndex& index,
                       const std::vector<double>& x);

}  // namespace co2i
