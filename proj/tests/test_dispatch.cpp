#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "co2i/dispatch.hpp"

using namespace co2i;

namespace {

OutputSpec out(std::string co, double eff = 1.0, double cap = kUnbounded, double cost = 0.0,
               double eta = 0.0) {
  OutputSpec o;
  o.commodity = std::move(co);
  o.efficiency = eff;
  o.capacity = cap;
  o.variable_cost = cost;
  o.emission_factor = eta;
  return o;
}

Process make(std::string id, ProcessKind kind, std::vector<std::string> in,
             std::vector<OutputSpec> outs) {
  Process p;
  p.id = std::move(id);
  p.kind = kind;
  p.inputs = std::move(in);
  p.outputs = std::move(outs);
  return p;
}

EnergySystem chain(double demand) {
  EnergySystem s;
  s.name = "chain";
  s.horizon = 1;
  s.commodities = {{"elec", "Electricity"}};
  s.processes = {make("grid", ProcessKind::Import, {}, {out("elec", 1.0, kUnbounded, 10.0, 0.2)}),
                 make("load", ProcessKind::Demand, {"elec"}, {})};
  s.demands["load"] = {demand};
  return s;
}

// Two imports with different prices and emissions, optional storage.
EnergySystem tiny(int steps, bool storage, const std::vector<double>& demand) {
  EnergySystem s;
  s.name = "tiny";
  s.horizon = steps;
  s.commodities = {{"elec", "Electricity"}};
  auto cheap = out("elec", 1.0, 1.0, 5.0, 0.9);
  cheap.availability.resize(static_cast<size_t>(steps));
  for (int t = 0; t < steps; ++t) cheap.availability[t] = t % 2 == 0 ? 1.0 : 0.3;
  s.processes = {make("cheap", ProcessKind::Import, {}, {cheap}),
                 make("dear", ProcessKind::Import, {}, {out("elec", 1.0, 2.0, 20.0, 0.3)})};
  if (storage) {
    auto st = make("store", ProcessKind::Storage, {"elec"}, {out("elec")});
    StorageParams sp;
    sp.charge_efficiency = 0.9;
    sp.self_discharge = 0.05;
    sp.energy_capacity = 1.5;
    st.storage = sp;
    s.processes.push_back(st);
  }
  s.processes.push_back(make("load", ProcessKind::Demand, {"elec"}, {}));
  s.demands["load"] = demand;
  return s;
}

double enumerate_min(const lp::StandardFormLP& lp, const std::vector<double>& cost) {
  const int n = lp.num_cols(), m = lp.num_rows();
  Eigen::MatrixXd a = Eigen::MatrixXd(lp.A);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<size_t>(n));
  Eigen::MatrixXd sys(n, n);
  Eigen::VectorXd rhs(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (m - start < n - depth) return;
    if (depth == n) {
      for (int k = 0; k < n; ++k) {
        sys.row(k) = a.row(pick[k]);
        rhs[k] = lp.rhs[pick[k]];
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
      if (std::abs(lu.determinant()) < 1e-10) return;
      Eigen::VectorXd x = lu.solve(rhs);
      Eigen::VectorXd ax = a * x;
      for (int i = 0; i < m; ++i) {
        const double viol = ax[i] - lp.rhs[i];
        if (viol > 1e-9 || (lp.sense[i] == lp::RowSense::Equal && viol < -1e-9)) return;
      }
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += cost[j] * x[j];
      best = std::min(best, obj);
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

void check_invariants(const EnergySystem& s, const DispatchResult& r) {
  const double tol = 1e-7;
  for (size_t p = 0; p < s.processes.size(); ++p) {
    for (const auto& slot : r.flows.E_in[p])
      for (double v : slot) CHECK(v >= -tol);
    for (const auto& slot : r.flows.E_out[p])
      for (double v : slot) CHECK(v >= -tol);
    if (s.processes[p].kind == ProcessKind::Storage)
      for (double v : r.flows.SL[p]) {
        CHECK(v >= -tol);
        CHECK(v <= s.processes[p].storage->energy_capacity + tol);
      }
  }
  for (const auto& co : s.commodities)
    for (int t = 0; t < s.horizon; ++t) {
      double bal = 0.0;
      for (size_t p = 0; p < s.processes.size(); ++p) {
        const auto& proc = s.processes[p];
        for (size_t k = 0; k < proc.inputs.size(); ++k)
          if (proc.inputs[k] == co.id) bal -= r.flows.E_in[p][k][t];
        for (size_t k = 0; k < proc.outputs.size(); ++k)
          if (proc.outputs[k].commodity == co.id) bal += r.flows.E_out[p][k][t];
      }
      CHECK(std::abs(bal) <= tol);
    }
  double m = 0.0;
  for (size_t p = 0; p < s.processes.size(); ++p)
    for (size_t k = 0; k < s.processes[p].outputs.size(); ++k)
      for (int t = 0; t < s.horizon; ++t)
        m += 1000.0 * s.processes[p].outputs[k].emission_factor * r.flows.E_out[p][k][t];
  CHECK(r.M_tot == doctest::Approx(m).epsilon(1e-9));
}

int pidx(const EnergySystem& s, const std::string& id) { return s.process_index(id); }

}  // namespace

TEST_CASE("one energy balance row per step") {
  auto s = make_sc_system(1);
  auto model = build_model(s);
  int count = 0;
  for (const auto& tag : model.lp.row_tags)
    if (tag.rfind("EnergyBalance(elec,", 0) == 0) ++count;
  CHECK(count == 24);
  for (int t = 0; t < 24; ++t)
    CHECK(model.row_index.count("EnergyBalance(elec," + std::to_string(t) + ")") == 1);
}

TEST_CASE("import to demand chain") {
  auto s = chain(1.0);
  auto r = solve_dispatch(s);
  CHECK(r.flows.E_out[0][0][0] == doctest::Approx(1.0));
  CHECK(r.M_tot == doctest::Approx(200.0));
  CHECK(r.cost == doctest::Approx(10.0));
}

TEST_CASE("CHP rows encode a fixed electricity ratio and flexible heat") {
  auto s = make_mc_system(1);
  auto model = build_model(s);
  const auto& lp = model.lp;
  const int gas = model.index.e_in[pidx(s, "chp")][0][5];
  const int elec = model.index.e_out[pidx(s, "chp")][0][5];
  const int heat = model.index.e_out[pidx(s, "chp")][1][5];
  const int pb = model.row_index.at("ProcessBalance(chp,elec,5)");
  const int fm = model.row_index.at("FlexMax(chp,heat,5)");
  CHECK(lp.sense[pb] == lp::RowSense::Equal);
  CHECK(lp.A.coeff(pb, elec) == 1.0);
  CHECK(lp.A.coeff(pb, gas) == doctest::Approx(-0.35));
  CHECK(lp.A.coeff(fm, heat) == 1.0);
  CHECK(lp.A.coeff(fm, gas) == doctest::Approx(-0.45));
  CHECK(model.row_index.count("FlexMin(chp,heat,5)") == 0);
}

TEST_CASE("merit order in SC scenario 1") {
  auto s = make_sc_system(1);
  auto r = solve_dispatch(s);
  check_invariants(s, r);
  // Hour 3 (demand 0.45 GWh): lignite alone.
  const int t = 2;
  CHECK(s.demands.at("load")[t] == doctest::Approx(0.45));
  CHECK(r.flows.E_out[pidx(s, "lignite_spp")][0][t] == doctest::Approx(0.45));
  CHECK(r.flows.E_out[pidx(s, "gas_cc")][0][t] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.flows.E_out[pidx(s, "pv")][0][t] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("SC scenario 2 runs lignite at capacity and emits more") {
  auto s1 = make_sc_system(1);
  auto s2 = make_sc_system(2);
  auto r1 = solve_dispatch(s1);
  auto r2 = solve_dispatch(s2);
  check_invariants(s2, r2);
  for (int t = 0; t < 24; ++t)
    CHECK(r2.flows.E_out[pidx(s2, "lignite_spp")][0][t] == doctest::Approx(0.75));
  CHECK(r2.M_tot >= r1.M_tot);
}

TEST_CASE("MC scenario 1 CHP runs at maximum heat outside storage discharge") {
  auto s = make_mc_system(1);
  auto r = solve_dispatch(s);
  check_invariants(s, r);
  const int chp = pidx(s, "chp"), st = pidx(s, "heat_store");
  int checked = 0;
  for (int t = 0; t < s.horizon; ++t) {
    if (r.flows.E_out[st][0][t] > 1e-9) continue;
    const double gas = r.flows.E_in[chp][0][t];
    REQUIRE(gas > 1e-9);
    CHECK(r.flows.E_out[chp][1][t] / gas == doctest::Approx(0.45));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("all builtin systems dispatch with valid invariants") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    auto s = make_builtin(name);
    auto r = solve_dispatch(s);
    check_invariants(s, r);
    auto cert = lp::certify(r.lp, r.sol);
    CHECK(cert.primal_infeasibility <= 1e-7);
    CHECK(cert.dual_residual <= 1e-7);
  }
}

TEST_CASE("small instances match exhaustive vertex enumeration") {
  DispatchOptions exact;
  exact.tie_break = 0.0;
  SUBCASE("three steps, two imports") {
    auto s = tiny(3, false, {0.8, 1.2, 2.1});
    auto r = solve_dispatch(s, exact);
    CHECK(r.cost == doctest::Approx(enumerate_min(r.lp, r.lp.cost)).epsilon(1e-9));
  }
  SUBCASE("two steps with storage") {
    auto s = tiny(2, true, {0.2, 1.9});
    auto r = solve_dispatch(s, exact);
    check_invariants(s, r);
    CHECK(r.cost == doctest::Approx(enumerate_min(r.lp, r.lp.cost)).epsilon(1e-9));
  }
}

TEST_CASE("tie-break does not change the optimal cost") {
  auto s = tiny(3, true, {0.5, 1.0, 1.5});
  DispatchOptions exact;
  exact.tie_break = 0.0;
  auto a = solve_dispatch(s);
  auto b = solve_dispatch(s, exact);
  CHECK(a.cost == doctest::Approx(b.cost).epsilon(1e-7));
}

TEST_CASE("infeasible and unbounded systems") {
  SUBCASE("demand above capacity") {
    auto s = tiny(1, false, {3.5});
    CHECK_THROWS_AS(solve_dispatch(s), InfeasibleSystem);
  }
  SUBCASE("negative-cost cycle") {
    EnergySystem s;
    s.name = "cycle";
    s.horizon = 1;
    s.commodities = {{"x", "X"}, {"y", "Y"}};
    s.processes = {make("src", ProcessKind::Import, {}, {out("x", 1.0, kUnbounded, -1.0)}),
                   make("p", ProcessKind::Standard, {"x"}, {out("y", 0.5)}),
                   make("q", ProcessKind::Standard, {"y"}, {out("x", 1.0)}),
                   make("load", ProcessKind::Demand, {"x"}, {})};
    s.demands["load"] = {1.0};
    CHECK_THROWS_AS(solve_dispatch(s), UnboundedModel);
  }
  SUBCASE("invalid system") {
    auto s = chain(1.0);
    s.demands.clear();
    CHECK_THROWS_AS(solve_dispatch(s), ValidationError);
  }
}
