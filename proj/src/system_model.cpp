#include "co2i/system_model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace co2i {

const char* to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::Standard: return "standard";
    case ProcessKind::Storage: return "storage";
    case ProcessKind::Import: return "import";
    case ProcessKind::Demand: return "demand";
  }
  return "?";
}

std::optional<ProcessKind> parse_process_kind(const std::string& text) {
  if (text == "standard") return ProcessKind::Standard;
  if (text == "storage") return ProcessKind::Storage;
  if (text == "import") return ProcessKind::Import;
  if (text == "demand") return ProcessKind::Demand;
  return std::nullopt;
}

int EnergySystem::commodity_index(const std::string& id) const {
  for (size_t i = 0; i < commodities.size(); ++i)
    if (commodities[i].id == id) return static_cast<int>(i);
  return -1;
}

int EnergySystem::process_index(const std::string& id) const {
  for (size_t i = 0; i < processes.size(); ++i)
    if (processes[i].id == id) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& EnergySystem::demand_of(const Process& p) const {
  auto it = demands.find(p.id);
  if (it == demands.end())
    throw std::out_of_range("no demand profile for process " + p.id);
  return it->second;
}

bool ValidationReport::mentions(const std::string& needle) const {
  for (const auto& v : violations)
    if (v.message.find(needle) != std::string::npos) return true;
  return false;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.object_id << ": " << v.message << '\n';
  return os.str();
}

namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}
  void fail(const std::string& id, const std::string& msg) {
    report_.violations.push_back({id, msg});
  }

 private:
  ValidationReport& report_;
};

void check_profile(Checker& c, const std::string& id, const std::string& what,
                   const std::vector<double>& values, int horizon, bool unit_range) {
  if (static_cast<int>(values.size()) != horizon) {
    c.fail(id, what + " has " + std::to_string(values.size()) + " entries, horizon is " +
                   std::to_string(horizon));
    return;
  }
  for (size_t t = 0; t < values.size(); ++t) {
    const double v = values[t];
    if (!std::isfinite(v) || v < 0.0 || (unit_range && v > 1.0)) {
      c.fail(id, what + " out of range at step " + std::to_string(t));
      return;
    }
  }
}

}  // namespace

ValidationReport validate(const EnergySystem& system) {
  ValidationReport report;
  Checker c(report);

  if (system.horizon < 1) c.fail(system.name, "horizon must be at least 1");
  if (!(system.step_hours > 0.0)) c.fail(system.name, "step length must be positive");

  std::set<std::string> seen;
  for (const auto& co : system.commodities)
    if (!seen.insert(co.id).second) c.fail(co.id, "duplicate commodity id");
  std::set<std::string> seen_proc;
  for (const auto& p : system.processes)
    if (!seen_proc.insert(p.id).second) c.fail(p.id, "duplicate process id");

  auto known = [&](const std::string& co) { return system.commodity_index(co) >= 0; };

  for (const auto& p : system.processes) {
    for (const auto& in : p.inputs)
      if (!known(in)) c.fail(p.id, "unknown commodity '" + in + "'");
    for (const auto& out : p.outputs) {
      if (!known(out.commodity)) c.fail(p.id, "unknown commodity '" + out.commodity + "'");
      if (out.flexible()) {
        if (p.kind != ProcessKind::Standard)
          c.fail(p.id, "flexible output only allowed on standard processes");
        if (!(*out.efficiency_min >= 0.0 && *out.efficiency_min <= out.efficiency))
          c.fail(p.id, "flexible efficiency range must satisfy 0 <= min <= max");
      } else if (!(out.efficiency > 0.0) || !std::isfinite(out.efficiency)) {
        c.fail(p.id, "efficiency must be positive for output '" + out.commodity + "'");
      }
      if (!(out.capacity >= 0.0)) c.fail(p.id, "negative capacity");
      if (!std::isfinite(out.variable_cost)) c.fail(p.id, "non-finite variable cost");
      if (!std::isfinite(out.emission_factor)) c.fail(p.id, "non-finite emission factor");
      if (!out.availability.empty())
        check_profile(c, p.id, "availability of '" + out.commodity + "'", out.availability,
                      system.horizon, true);
    }

    switch (p.kind) {
      case ProcessKind::Import:
        if (!p.inputs.empty()) c.fail(p.id, "import has inputs");
        if (p.outputs.empty()) c.fail(p.id, "import has no outputs");
        break;
      case ProcessKind::Demand:
        if (!p.outputs.empty()) c.fail(p.id, "demand has outputs");
        if (p.inputs.size() != 1) c.fail(p.id, "demand must have exactly one input");
        if (auto it = system.demands.find(p.id); it == system.demands.end())
          c.fail(p.id, "demand profile missing");
        else
          check_profile(c, p.id, "demand profile", it->second, system.horizon, false);
        break;
      case ProcessKind::Storage: {
        if (p.inputs.size() != 1 || p.outputs.size() != 1 ||
            p.inputs[0] != p.outputs[0].commodity)
          c.fail(p.id, "storage needs exactly one commodity on input and output side");
        if (!p.storage) {
          c.fail(p.id, "storage parameters missing");
          break;
        }
        const auto& s = *p.storage;
        if (!(s.charge_efficiency > 0.0 && s.charge_efficiency <= 1.0))
          c.fail(p.id, "charge efficiency must lie in (0,1]");
        if (!(s.self_discharge >= 0.0 && s.self_discharge < 1.0))
          c.fail(p.id, "self-discharge must lie in [0,1)");
        if (!(s.energy_capacity >= 0.0)) c.fail(p.id, "negative energy capacity");
        if (!(s.initial_level >= 0.0 && s.initial_level <= s.energy_capacity))
          c.fail(p.id, "initial level outside [0, capacity]");
        if (!(s.initial_co2 >= 0.0)) c.fail(p.id, "negative initial stored CO2");
        for (const auto& out : p.outputs)
          if (out.emission_factor != 0.0) c.fail(p.id, "storage output cannot emit CO2");
        break;
      }
      case ProcessKind::Standard:
        if (p.inputs.empty()) c.fail(p.id, "standard process has no inputs");
        if (p.outputs.empty()) c.fail(p.id, "standard process has no outputs");
        break;
    }
    if (p.kind != ProcessKind::Storage && p.storage)
      c.fail(p.id, "storage parameters on non-storage process");
    if (p.kind != ProcessKind::Demand && system.demands.count(p.id))
      c.fail(p.id, "demand profile on non-demand process");
  }

  for (const auto& [id, _] : system.demands)
    if (system.process_index(id) < 0) c.fail(id, "demand profile for unknown process");

  // Reachability: a commodity is producible if an import yields it or a
  // standard/storage process with a producible input yields it.
  std::set<std::string> producible;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& p : system.processes) {
      if (p.kind == ProcessKind::Demand) continue;
      bool fed = p.kind == ProcessKind::Import;
      for (const auto& in : p.inputs) fed = fed || producible.count(in) > 0;
      if (!fed) continue;
      for (const auto& out : p.outputs) grew = producible.insert(out.commodity).second || grew;
    }
  }
  for (const auto& p : system.processes) {
    if (p.kind != ProcessKind::Demand || p.inputs.size() != 1) continue;
    auto it = system.demands.find(p.id);
    if (it == system.demands.end()) continue;
    double total = 0.0;
    for (double d : it->second) total += d;
    if (total > 0.0 && !producible.count(p.inputs[0]))
      c.fail(p.id, "no producing path for commodity '" + p.inputs[0] + "'");
  }
  return report;
}

void require_valid(const EnergySystem& system) {
  auto report = validate(system);
  if (!report.ok()) throw ValidationError(std::move(report));
}

std::map<std::string, double> max_import_energy(const EnergySystem& system) {
  std::map<std::string, double> total;
  for (const auto& p : system.processes) {
    if (p.kind != ProcessKind::Import) continue;
    for (const auto& out : p.outputs) {
      double sum = 0.0;
      for (int t = 0; t < system.horizon; ++t)
        sum += out.capacity * out.availability_at(t) * system.step_hours;
      total[out.commodity] += sum;
    }
  }
  return total;
}

}  // namespace co2i
