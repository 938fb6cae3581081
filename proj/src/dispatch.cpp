#include "co2i/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace co2i {

FlowData FlowData::zeros(const EnergySystem& system) {
  FlowData f;
  const size_t np = system.processes.size();
  const auto steps = static_cast<size_t>(system.horizon);
  f.E_in.resize(np);
  f.E_out.resize(np);
  f.SL.resize(np);
  for (size_t p = 0; p < np; ++p) {
    const auto& proc = system.processes[p];
    f.E_in[p].assign(proc.inputs.size(), std::vector<double>(steps, 0.0));
    f.E_out[p].assign(proc.outputs.size(), std::vector<double>(steps, 0.0));
    if (proc.kind == ProcessKind::Storage) f.SL[p].assign(steps, 0.0);
  }
  return f;
}

double FlowData::input_total(int p, int t) const {
  double s = 0.0;
  for (const auto& slot : E_in[p]) s += slot[t];
  return s;
}

double FlowData::output_total(int p, int t) const {
  double s = 0.0;
  for (const auto& slot : E_out[p]) s += slot[t];
  return s;
}

double FlowData::production(const EnergySystem& system, const std::string& co, int t) const {
  double s = 0.0;
  for (size_t p = 0; p < system.processes.size(); ++p) {
    const auto& outs = system.processes[p].outputs;
    for (size_t k = 0; k < outs.size(); ++k)
      if (outs[k].commodity == co) s += E_out[p][k][t];
  }
  return s;
}

namespace {

std::string tag(const std::string& name, std::initializer_list<std::string> args) {
  std::string s = name + "(";
  bool first = true;
  for (const auto& a : args) {
    if (!first) s += ",";
    s += a;
    first = false;
  }
  return s + ")";
}

}  // namespace

DispatchModel build_model(const EnergySystem& system, const DispatchOptions& options) {
  require_valid(system);
  const int steps = system.horizon;
  const double dt = system.step_hours;
  const auto& procs = system.processes;
  const int np = static_cast<int>(procs.size());
  const int nc = static_cast<int>(system.commodities.size());

  DispatchModel model;
  DispatchIndex& idx = model.index;
  idx.e_in.resize(np);
  idx.e_out.resize(np);
  idx.sl.assign(np, std::vector<int>(steps, -1));
  for (int p = 0; p < np; ++p) {
    idx.e_in[p].assign(procs[p].inputs.size(), std::vector<int>(steps, -1));
    idx.e_out[p].assign(procs[p].outputs.size(), std::vector<int>(steps, -1));
  }

  lp::LpBuilder b;
  std::vector<char> flow_col;
  auto col = [&](std::string name, double cost) {
    flow_col.push_back(1);
    return b.add_col(std::move(name), cost);
  };
  for (int t = 0; t < steps; ++t) {
    const std::string ts = std::to_string(t);
    for (int p = 0; p < np; ++p) {
      const auto& proc = procs[p];
      if (proc.kind == ProcessKind::Demand) continue;
      for (size_t k = 0; k < proc.outputs.size(); ++k) {
        const auto& out = proc.outputs[k];
        idx.e_out[p][k][t] = col(tag("E_out", {proc.id, out.commodity, ts}), out.variable_cost);
      }
    }
    for (int p = 0; p < np; ++p) {
      const auto& proc = procs[p];
      if (proc.kind == ProcessKind::Import) continue;
      for (size_t k = 0; k < proc.inputs.size(); ++k)
        idx.e_in[p][k][t] = col(tag("E_in", {proc.inputs[k], proc.id, ts}), 0.0);
    }
    for (int p = 0; p < np; ++p)
      if (procs[p].kind == ProcessKind::Storage) idx.sl[p][t] = col(tag("SL", {procs[p].id, ts}), 0.0);
  }
  idx.m_tot = b.add_col("M_tot", 0.0);
  flow_col.push_back(0);

  model.base_cost.resize(static_cast<size_t>(b.num_cols()));
  double cmax = 1.0;
  for (int j = 0; j < b.num_cols(); ++j) {
    model.base_cost[j] = b.cost(j);
    cmax = std::max(cmax, std::abs(b.cost(j)));
  }
  if (options.tie_break > 0.0) {
    const double scale = options.tie_break * cmax;
    const double ncols = b.num_cols();
    for (int j = 0; j < b.num_cols(); ++j)
      if (flow_col[j]) b.set_cost(j, b.cost(j) + scale * (1.0 + j / ncols));
  }
  idx.perturbed_col = flow_col;

  using Rows = std::vector<std::pair<int, double>>;
  using lp::RowSense;
  idx.energy_balance.assign(nc, std::vector<int>(steps, -1));
  idx.demand_fix.assign(nc, std::vector<int>(steps, -1));
  for (int t = 0; t < steps; ++t) {
    const std::string ts = std::to_string(t);
    std::vector<Rows> balance(static_cast<size_t>(nc));

    for (int p = 0; p < np; ++p) {
      const auto& proc = procs[p];
      Rows inputs;
      for (size_t k = 0; k < proc.inputs.size(); ++k) {
        const int c = idx.e_in[p][k][t];
        if (c < 0) continue;
        inputs.emplace_back(c, 1.0);
        balance[system.commodity_index(proc.inputs[k])].emplace_back(c, -1.0);
        if (proc.kind != ProcessKind::Demand)
          b.add_row(tag("NonNeg", {tag("E_in", {proc.inputs[k], proc.id, ts})}), RowSense::LessEqual,
                    0.0, {{c, -1.0}});
      }
      for (size_t k = 0; k < proc.outputs.size(); ++k) {
        const auto& out = proc.outputs[k];
        const int c = idx.e_out[p][k][t];
        if (c < 0) continue;
        balance[system.commodity_index(out.commodity)].emplace_back(c, 1.0);
        b.add_row(tag("NonNeg", {tag("E_out", {proc.id, out.commodity, ts})}), RowSense::LessEqual,
                  0.0, {{c, -1.0}});
        if (std::isfinite(out.capacity))
          b.add_row(tag("Capacity", {proc.id, out.commodity, ts}), RowSense::LessEqual,
                    out.availability_at(t) * out.capacity * dt, {{c, 1.0}});
        if (proc.kind != ProcessKind::Standard) continue;
        if (!out.flexible()) {
          Rows r{{c, 1.0}};
          for (auto [ic, _] : inputs) r.emplace_back(ic, -out.efficiency);
          b.add_row(tag("ProcessBalance", {proc.id, out.commodity, ts}), RowSense::Equal, 0.0, r);
        } else {
          Rows hi{{c, 1.0}};
          for (auto [ic, _] : inputs) hi.emplace_back(ic, -out.efficiency);
          b.add_row(tag("FlexMax", {proc.id, out.commodity, ts}), RowSense::LessEqual, 0.0, hi);
          if (*out.efficiency_min > 0.0) {
            Rows lo{{c, -1.0}};
            for (auto [ic, _] : inputs) lo.emplace_back(ic, *out.efficiency_min);
            b.add_row(tag("FlexMin", {proc.id, out.commodity, ts}), RowSense::LessEqual, 0.0, lo);
          }
        }
      }

      if (proc.kind == ProcessKind::Storage) {
        const auto& sp = *proc.storage;
        const int sl = idx.sl[p][t];
        const double keep = std::pow(1.0 - sp.self_discharge, dt);
        Rows r{{sl, 1.0}};
        double rhs = 0.0;
        if (t > 0) r.emplace_back(idx.sl[p][t - 1], -keep);
        else rhs = keep * sp.initial_level;
        for (auto [ic, _] : inputs) r.emplace_back(ic, -sp.charge_efficiency);
        for (size_t k = 0; k < proc.outputs.size(); ++k) r.emplace_back(idx.e_out[p][k][t], 1.0);
        b.add_row(tag("StorageBalance", {proc.id, ts}), RowSense::Equal, rhs, r);
        b.add_row(tag("NonNeg", {tag("SL", {proc.id, ts})}), RowSense::LessEqual, 0.0, {{sl, -1.0}});
        if (std::isfinite(sp.energy_capacity))
          b.add_row(tag("StorageCapacity", {proc.id, ts}), RowSense::LessEqual, sp.energy_capacity,
                    {{sl, 1.0}});
      }

      if (proc.kind == ProcessKind::Demand) {
        const int c = idx.e_in[p][0][t];
        const int ci = system.commodity_index(proc.inputs[0]);
        const bool first = idx.demand_fix[ci][t] < 0;
        const std::string name = first ? tag("DemandFix", {proc.inputs[0], ts})
                                       : tag("DemandFix", {proc.inputs[0], ts, proc.id});
        const int row = b.add_row(name, RowSense::Equal, system.demand_of(proc)[t], {{c, 1.0}});
        if (first) idx.demand_fix[ci][t] = row;
      }
    }

    for (int ci = 0; ci < nc; ++ci)
      idx.energy_balance[ci][t] = b.add_row(tag("EnergyBalance", {system.commodities[ci].id, ts}),
                                            RowSense::Equal, 0.0, balance[ci]);
  }

  Rows co2{{idx.m_tot, 1.0}};
  for (int p = 0; p < np; ++p)
    for (size_t k = 0; k < procs[p].outputs.size(); ++k) {
      const double eta = procs[p].outputs[k].emission_factor;
      if (eta == 0.0) continue;
      for (int t = 0; t < steps; ++t) co2.emplace_back(idx.e_out[p][k][t], -1000.0 * eta);
    }
  idx.co2_row = b.add_row("CO2Balance", RowSense::Equal, 0.0, co2);

  model.lp = b.build();
  for (int i = 0; i < model.lp.num_rows(); ++i) model.row_index[model.lp.row_tags[i]] = i;
  return model;
}

lp::StandardFormLP build_lp(const EnergySystem& system) { return build_model(system).lp; }

FlowData extract_flows(const EnergySystem& system, const DispatchIndex& index,
                       const std::vector<double>& x) {
  FlowData f = FlowData::zeros(system);
  for (size_t p = 0; p < system.processes.size(); ++p) {
    for (size_t k = 0; k < index.e_in[p].size(); ++k)
      for (int t = 0; t < system.horizon; ++t)
        if (index.e_in[p][k][t] >= 0) f.E_in[p][k][t] = x[index.e_in[p][k][t]];
    for (size_t k = 0; k < index.e_out[p].size(); ++k)
      for (int t = 0; t < system.horizon; ++t)
        if (index.e_out[p][k][t] >= 0) f.E_out[p][k][t] = x[index.e_out[p][k][t]];
    if (!f.SL[p].empty())
      for (int t = 0; t < system.horizon; ++t) f.SL[p][t] = x[index.sl[p][t]];
  }
  return f;
}

DispatchResult solve_dispatch(const EnergySystem& system, const DispatchOptions& options) {
  DispatchModel model = build_model(system, options);
  DispatchResult r;
  r.sol = lp::solve(model.lp, options.lp);
  if (r.sol.status == lp::SolveStatus::Infeasible) {
    std::ostringstream os;
    os << "dispatch of '" << system.name << "' is infeasible; conflicting rows:";
    int shown = 0;
    for (int i = 0; i < model.lp.num_rows() && shown < 8; ++i)
      if (!r.sol.certificate.empty() && std::abs(r.sol.certificate[i]) > 1e-9) {
        os << ' ' << model.lp.row_tags[i];
        ++shown;
      }
    throw InfeasibleSystem(os.str());
  }
  if (r.sol.status == lp::SolveStatus::Unbounded)
    throw UnboundedModel("dispatch of '" + system.name + "' is unbounded (negative-cost cycle?)");

  r.flows = extract_flows(system, model.index, r.sol.x);
  r.M_tot = r.sol.x[model.index.m_tot];
  r.cost = 0.0;
  for (size_t j = 0; j < model.base_cost.size(); ++j) r.cost += model.base_cost[j] * r.sol.x[j];
  double cmax = 1.0;
  for (double c : model.base_cost) cmax = std::max(cmax, std::abs(c));
  r.tie_break_scale = options.tie_break * cmax;
  r.lp = std::move(model.lp);
  r.index = std::move(model.index);
  r.row_index = std::move(model.row_index);
  return r;
}

}  // namespace co2i
