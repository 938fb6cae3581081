#pragma once

// As-is CO2 tracing: follows emitted CO2 through conversion processes and
// storages to the consumers, given the energy flows of every step. All
// commodities, storages and steps are coupled in one sparse linear system.
//
// Intensities are in t/MWh, CO2 amounts in t, energies in GWh.

#include <Eigen/SparseCore>
#include <stdexcept>
#include <string>
#include <vector>

#include "co2i/dispatch.hpp"

namespace co2i {

struct AsIsOptions {
  double epsilon = 1e-6;        // GWh; smaller denominators are pinned
  double residual_tol = 1e-9;   // relative to the system scale
};

/// Unknown layout of the trace system. -1 marks absent entries.
struct AsIsLayout {
  std::vector<std::vector<int>> I;                  // [commodity][t]
  std::vector<std::vector<int>> I_stor;             // [process][t]
  std::vector<std::vector<int>> M_in;               // [process][t]
  std::vector<std::vector<std::vector<int>>> M_out; // [process][slot][t]
  std::vector<std::vector<int>> M_stor;             // [process][t]
  int size = 0;
};

struct AsIsSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  AsIsLayout layout;
  std::vector<std::string> unknown_tags;
  std::vector<std::string> equation_tags;
  std::vector<std::vector<char>> thresholded;       // [commodity][t]
  std::vector<std::vector<char>> stor_thresholded;  // [process][t]
  std::vector<std::vector<char>> output_pinned;     // [process][t] CO2 dropped, no output
  std::vector<double> initial_stor_intensity;       // [process]
};

struct AsIsResult {
  std::vector<std::vector<double>> I;                   // [commodity][t]
  std::vector<std::vector<double>> I_stor;              // [process][t], empty if not storage
  std::vector<std::vector<double>> M_in;                // [process][t], empty for imports
  std::vector<std::vector<std::vector<double>>> M_out;  // [process][slot][t]
  std::vector<std::vector<double>> M_stor;              // [process][t], empty if not storage
  std::vector<std::vector<char>> thresholded;
  std::vector<std::vector<char>> stor_thresholded;
  double max_residual = 0.0;
  double residual_scale = 1.0;
};

class SingularTraceSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AsIsSystem build_asis_system(const EnergySystem& system, const FlowData& flows,
                             const AsIsOptions& options = {});
AsIsResult compute_asis(const EnergySystem& system, const FlowData& flows,
                        const AsIsOptions& options = {});
inline AsIsResult compute_asis(const EnergySystem& system, const DispatchResult& dispatch,
                               const AsIsOptions& options = {}) {
  return compute_asis(system, dispatch.flows, options);
}

/// System-wide CO2 bookkeeping over the horizon [t].
struct Co2Balance {
  double emitted = 0.0;         // by imports and converters
  double initial_stored = 0.0;
  double delivered = 0.0;       // to demand processes
  double final_stored = 0.0;
  double dropped = 0.0;         // inflow of converters without output
  double residual() const { return emitted + initial_stored - delivered - final_stored - dropped; }
  double total() const { return emitted + initial_stored; }
};

Co2Balance co2_balance(const EnergySystem& system, const FlowData& flows, const AsIsResult& r);

}  // namespace co2i
