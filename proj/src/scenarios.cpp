// Built-in test systems: the single-commodity (SC) merit-order system with
// optional electric storage and the multi-commodity (MC) CHP/heat system.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "co2i/system_model.hpp"

namespace co2i {
namespace {

// Hour label of step t under the hour-ending convention.
double hour_of(int t) { return static_cast<double>(t + 1); }

OutputSpec output(std::string co, double efficiency, double capacity, double cost,
                  double emission) {
  OutputSpec o;
  o.commodity = std::move(co);
  o.efficiency = efficiency;
  o.capacity = capacity;
  o.variable_cost = cost;
  o.emission_factor = emission;
  return o;
}

Process import_process(std::string id, OutputSpec out) {
  Process p;
  p.id = std::move(id);
  p.kind = ProcessKind::Import;
  p.outputs.push_back(std::move(out));
  return p;
}

Process demand_process(std::string id, std::string co) {
  Process p;
  p.id = std::move(id);
  p.kind = ProcessKind::Demand;
  p.inputs.push_back(std::move(co));
  return p;
}

Process storage_process(std::string id, const std::string& co, StorageParams params) {
  Process p;
  p.id = std::move(id);
  p.kind = ProcessKind::Storage;
  p.inputs.push_back(co);
  p.outputs.push_back(output(co, 1.0, kUnbounded, 0.0, 0.0));
  p.storage = params;
  return p;
}

// SC parameters.
constexpr int kScSteps = 24;
constexpr double kScPeakDemand = 1.5;      // GW, reached at hour 10
constexpr double kLignitePerMwhFuel = 0.41;
constexpr double kGasPerMwhFuel = 0.20;
constexpr double kScStorageCapacity = 6.0;  // GWh, tunable

double sc_demand(int t) { return kScPeakDemand * std::min(hour_of(t), 10.0) / 10.0; }

double sc_pv_availability(int t) {
  const double h = hour_of(t);
  if (h <= 10.0) return 0.0;
  if (h <= 17.0) return (h - 10.0) / 7.0;
  return std::max(0.0, (24.0 - h) / 7.0);
}

// MC parameters.
constexpr double kMcElecBase = 0.5;  // GW
constexpr double kChpElecPerGas = 0.35;
constexpr double kChpTotalPerGas = 0.80;
constexpr double kHeatStorageChargeEff = 0.95;
constexpr double kHeatStorageSelfDischarge = 0.01;
constexpr int kMcMixedStep = 38;       // day-2 step where the store runs empty
constexpr double kMcMixedShare = 0.44;  // share of that step's heat from storage

double mc_heat_base(int t) {
  const double h = std::fmod(hour_of(t), 24.0);
  return 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (h - 18.0) / 24.0);
}

double mc_pv_availability(int t) {
  if (t >= 24) return 0.0;
  return 0.6 + 0.4 * std::sin(std::numbers::pi * (hour_of(t) - 6.0) / 12.0);
}

// Level the heat store must hold at the end of day 1 so that, discharging as
// early as possible, it covers day-2 heat demand fully up to kMcMixedStep and
// kMcMixedShare of the demand in that step.
double mc_storage_capacity() {
  const double keep = 1.0 - kHeatStorageSelfDischarge;
  double level = kMcMixedShare * mc_heat_base(kMcMixedStep) / keep;
  for (int t = kMcMixedStep - 1; t >= 24; --t) level = (level + mc_heat_base(t)) / keep;
  return level;
}

// PV must cover day-1 heat demand in every hour with 10% headroom and offer a
// day-1 surplus 25% above what it takes to fill the store.
double mc_pv_capacity(double storage_capacity) {
  double cap = 0.0;
  double demand = 0.0, avail = 0.0;
  for (int t = 0; t < 24; ++t) {
    cap = std::max(cap, 1.1 * mc_heat_base(t) / mc_pv_availability(t));
    demand += mc_heat_base(t);
    avail += mc_pv_availability(t);
  }
  const double fill = 1.25 * storage_capacity / kHeatStorageChargeEff;
  return std::max(cap, (demand + fill) / avail);
}

}  // namespace

EnergySystem make_sc_system(int scenario) {
  if (scenario != 1 && scenario != 2)
    throw std::invalid_argument("SC scenario must be 1 or 2, got " + std::to_string(scenario));

  EnergySystem s;
  s.name = "sc" + std::to_string(scenario);
  s.horizon = kScSteps;
  s.step_hours = 1.0;
  s.commodities = {{"elec", "Electricity"}};

  s.processes.push_back(import_process(
      "lignite_spp", output("elec", 1.0, 0.75, 30.0, kLignitePerMwhFuel / 0.45)));
  s.processes.push_back(
      import_process("gas_cc", output("elec", 1.0, kUnbounded, 50.0, kGasPerMwhFuel / 0.60)));
  auto pv = output("elec", 1.0, 1.3, 0.0, 0.0);
  for (int t = 0; t < kScSteps; ++t) pv.availability.push_back(sc_pv_availability(t));
  s.processes.push_back(import_process("pv", std::move(pv)));
  if (scenario == 2) {
    StorageParams params;
    params.charge_efficiency = 1.0;
    params.self_discharge = 0.01;
    params.energy_capacity = kScStorageCapacity;
    s.processes.push_back(storage_process("battery", "elec", params));
  }
  s.processes.push_back(demand_process("load", "elec"));

  std::vector<double> demand;
  for (int t = 0; t < kScSteps; ++t) demand.push_back(sc_demand(t) * s.step_hours);
  s.demands["load"] = std::move(demand);
  return s;
}

EnergySystem make_mc_system(int scenario) {
  if (scenario < 1 || scenario > 3)
    throw std::invalid_argument("MC scenario must be 1, 2 or 3, got " + std::to_string(scenario));

  // Demand scaling of the base profiles per scenario (elec, heat).
  constexpr double kElecShare[] = {0.5, 0.0, 1.0};
  constexpr double kHeatShare[] = {1.0, 1.0, 0.3};
  const double elec_share = kElecShare[scenario - 1];
  const double heat_share = kHeatShare[scenario - 1];

  EnergySystem s;
  s.name = "mc" + std::to_string(scenario);
  s.horizon = scenario == 2 ? 48 : 24;
  s.step_hours = 1.0;
  s.commodities = {{"gas", "Natural gas"}, {"elec", "Electricity"}, {"heat", "Heat"}};

  // Cost of operation is the consumed gas.
  s.processes.push_back(
      import_process("gas_import", output("gas", 1.0, kUnbounded, 1.0, kGasPerMwhFuel)));

  Process chp;
  chp.id = "chp";
  chp.kind = ProcessKind::Standard;
  chp.inputs = {"gas"};
  chp.outputs.push_back(output("elec", kChpElecPerGas, kUnbounded, 0.0, 0.0));
  auto heat = output("heat", kChpTotalPerGas - kChpElecPerGas, kUnbounded, 0.0, 0.0);
  heat.efficiency_min = 0.0;
  chp.outputs.push_back(std::move(heat));
  s.processes.push_back(std::move(chp));

  const double storage_capacity = mc_storage_capacity();
  if (scenario != 3) {
    Process heater;
    heater.id = "heater";
    heater.kind = ProcessKind::Standard;
    heater.inputs = {"elec"};
    heater.outputs.push_back(output("heat", 1.0, kUnbounded, 0.0, 0.0));
    s.processes.push_back(std::move(heater));

    StorageParams params;
    params.charge_efficiency = kHeatStorageChargeEff;
    params.self_discharge = kHeatStorageSelfDischarge;
    params.energy_capacity = storage_capacity;
    s.processes.push_back(storage_process("heat_store", "heat", params));
  }
  if (scenario == 2) {
    auto pv = output("elec", 1.0, mc_pv_capacity(storage_capacity), 0.0, 0.0);
    for (int t = 0; t < s.horizon; ++t) pv.availability.push_back(mc_pv_availability(t));
    s.processes.push_back(import_process("pv", std::move(pv)));
  }
  s.processes.push_back(demand_process("elec_load", "elec"));
  s.processes.push_back(demand_process("heat_load", "heat"));

  std::vector<double> elec, heat_demand;
  for (int t = 0; t < s.horizon; ++t) {
    elec.push_back(elec_share * kMcElecBase * s.step_hours);
    heat_demand.push_back(heat_share * mc_heat_base(t) * s.step_hours);
  }
  s.demands["elec_load"] = std::move(elec);
  s.demands["heat_load"] = std::move(heat_demand);
  return s;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"sc1", "sc2", "mc1", "mc2", "mc3"};
  return names;
}

EnergySystem make_builtin(const std::string& name) {
  if (name == "sc1") return make_sc_system(1);
  if (name == "sc2") return make_sc_system(2);
  if (name == "mc1") return make_mc_system(1);
  if (name == "mc2") return make_mc_system(2);
  if (name == "mc3") return make_mc_system(3);
  throw std::invalid_argument("unknown builtin scenario '" + name + "'");
}

}  // namespace co2i
