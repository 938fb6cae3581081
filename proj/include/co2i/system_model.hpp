#pragma once

// Domain types for multi-modal energy systems: commodities, conversion
// processes (standard, storage, import, demand) and the system graph with
// its time horizon and demand profiles.
//
// Units: power in GW, energy per step in GWh, emission factors in t/MWh,
// variable costs in currency/MWh. Time steps are hour-ending: step k covers
// the interval (k*dt, (k+1)*dt] and profiles are sampled at its end.

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace co2i {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Commodity {
  std::string id;
  std::string name;

  bool operator==(const Commodity&) const = default;
};

enum class ProcessKind { Standard, Storage, Import, Demand };

const char* to_string(ProcessKind kind);
std::optional<ProcessKind> parse_process_kind(const std::string& text);

/// One output of a process. For a fixed-ratio output `efficiency` is
/// kappa(cp,co); a flexible output (Standard kind only) may produce anywhere
/// in [efficiency_min, efficiency] per unit of total input.
struct OutputSpec {
  std::string commodity;
  double efficiency = 1.0;
  std::optional<double> efficiency_min;
  double capacity = kUnbounded;  // GW
  double variable_cost = 0.0;    // currency/MWh
  double emission_factor = 0.0;  // t/MWh of this output
  std::vector<double> availability;  // per step in [0,1]; empty = always 1

  bool flexible() const { return efficiency_min.has_value(); }
  double availability_at(int t) const {
    return availability.empty() ? 1.0 : availability[static_cast<size_t>(t)];
  }
  bool operator==(const OutputSpec&) const = default;
};

struct StorageParams {
  double charge_efficiency = 1.0;  // (0,1]
  double self_discharge = 0.0;     // fraction of level lost per hour, [0,1)
  double energy_capacity = kUnbounded;  // GWh
  double initial_level = 0.0;           // GWh
  double initial_co2 = 0.0;             // t

  bool operator==(const StorageParams&) const = default;
};

struct Process {
  std::string id;
  ProcessKind kind = ProcessKind::Standard;
  std::vector<std::string> inputs;
  std::vector<OutputSpec> outputs;
  std::optional<StorageParams> storage;

  bool operator==(const Process&) const = default;
};

struct EnergySystem {
  std::string name;
  std::vector<Commodity> commodities;
  std::vector<Process> processes;
  int horizon = 1;          // number of time steps
  double step_hours = 1.0;  // length of one step
  // Energy per step [GWh] for every Demand process, keyed by process id.
  std::map<std::string, std::vector<double>> demands;

  bool operator==(const EnergySystem&) const = default;

  int commodity_index(const std::string& id) const;  // -1 if absent
  int process_index(const std::string& id) const;    // -1 if absent
  const std::vector<double>& demand_of(const Process& p) const;
};

struct Violation {
  std::string object_id;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool mentions(const std::string& needle) const;
  std::string to_string() const;
};

ValidationReport validate(const EnergySystem& system);

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport r)
      : std::runtime_error("invalid energy system:\n" + r.to_string()), report(std::move(r)) {}
  ValidationReport report;
};

/// Throws ValidationError when validate() reports violations.
void require_valid(const EnergySystem& system);

/// Sum over steps of the most energy each commodity could be supplied with
/// from imports, ignoring conversion losses downstream. Used as a cheap
/// feasibility precheck against total demand.
std::map<std::string, double> max_import_energy(const EnergySystem& system);

/// Single-commodity electricity system (lignite SPP, gas CC, PV, demand;
/// scenario 2 adds a storage). Throws std::invalid_argument otherwise.
EnergySystem make_sc_system(int scenario);

/// Electricity/heat system with gas CHP (scenarios 1-3).
EnergySystem make_mc_system(int scenario);

/// "sc1", "sc2", "mc1", "mc2", "mc3".
EnergySystem make_builtin(const std::string& name);
const std::vector<std::string>& builtin_names();

}  // namespace co2i
