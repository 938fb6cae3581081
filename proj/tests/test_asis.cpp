#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "co2i/asis.hpp"
#include "random_systems.hpp"

using namespace co2i;
using co2i::testing::output;
using co2i::testing::process;

namespace {

int cidx(const EnergySystem& s, const std::string& id) { return s.commodity_index(id); }
int pidx(const EnergySystem& s, const std::string& id) { return s.process_index(id); }

void check_conservation(const EnergySystem& s, const FlowData& f, const AsIsResult& a) {
  const auto b = co2_balance(s, f, a);
  CHECK(std::abs(b.residual()) <= 1e-6 * std::max(1.0, b.total()));
}

// Power-to-gas loop: electricity import, electrolyser (elec -> gas), gas
// plant (gas -> elec), demands for both.
struct Loop {
  EnergySystem system;
  FlowData flows;
};

Loop power_to_gas() {
  Loop l;
  auto& s = l.system;
  s.name = "p2g";
  s.horizon = 2;
  s.commodities = {{"elec", "Electricity"}, {"gas", "Gas"}};
  s.processes = {process("grid", ProcessKind::Import, {}, {output("elec", 1.0, kUnbounded, 1.0, 0.5)}),
                 process("electrolyser", ProcessKind::Standard, {"elec"},
                         {output("gas", 0.7, kUnbounded, 0.0, 0.0)}),
                 process("gas_plant", ProcessKind::Standard, {"gas"},
                         {output("elec", 0.5, kUnbounded, 0.0, 0.0)}),
                 process("elec_load", ProcessKind::Demand, {"elec"}, {}),
                 process("gas_load", ProcessKind::Demand, {"gas"}, {})};
  s.demands["elec_load"] = {0.6, 0.6};
  s.demands["gas_load"] = {0.15, 0.15};
  l.flows = FlowData::zeros(s);
  for (int t = 0; t < 2; ++t) {
    l.flows.E_out[0][0][t] = 1.0;
    l.flows.E_in[1][0][t] = 0.5;
    l.flows.E_out[1][0][t] = 0.35;
    l.flows.E_in[2][0][t] = 0.2;
    l.flows.E_out[2][0][t] = 0.1;
    l.flows.E_in[3][0][t] = 0.6;
    l.flows.E_in[4][0][t] = 0.15;
  }
  return l;
}

}  // namespace

TEST_CASE("one-hop trace") {
  EnergySystem s;
  s.name = "hop";
  s.horizon = 1;
  s.commodities = {{"elec", "Electricity"}};
  s.processes = {process("grid", ProcessKind::Import, {}, {output("elec", 1.0, kUnbounded, 1.0, 0.2)}),
                 process("load", ProcessKind::Demand, {"elec"}, {})};
  s.demands["load"] = {1.0};
  auto a = compute_asis(s, solve_dispatch(s));
  CHECK(a.M_out[0][0][0] == doctest::Approx(200.0));  // 0.2 t/MWh * 1 GWh
  CHECK(a.I[0][0] == doctest::Approx(0.2));
  CHECK(a.M_in[1][0] == doctest::Approx(200.0));
}

TEST_CASE("outputs share inflowing CO2 in proportion to energy") {
  EnergySystem s;
  s.name = "split";
  s.horizon = 1;
  s.commodities = {{"gas", "Gas"}, {"elec", "Electricity"}, {"heat", "Heat"}};
  s.processes = {process("src", ProcessKind::Import, {}, {output("gas", 1.0, kUnbounded, 1.0, 0.1)}),
                 process("chp", ProcessKind::Standard, {"gas"},
                         {output("elec", 2.0 / 3.0, kUnbounded, 0, 0), output("heat", 1.0 / 3.0, kUnbounded, 0, 0)}),
                 process("e", ProcessKind::Demand, {"elec"}, {}),
                 process("h", ProcessKind::Demand, {"heat"}, {})};
  s.demands["e"] = {2.0};
  s.demands["h"] = {1.0};
  FlowData f = FlowData::zeros(s);
  f.E_out[0][0][0] = 3.0;
  f.E_in[1][0][0] = 3.0;
  f.E_out[1][0][0] = 2.0;
  f.E_out[1][1][0] = 1.0;
  f.E_in[2][0][0] = 2.0;
  f.E_in[3][0][0] = 1.0;
  auto a = compute_asis(s, f);
  CHECK(a.M_in[1][0] == doctest::Approx(300.0));
  CHECK(a.M_out[1][0][0] == doctest::Approx(200.0));
  CHECK(a.M_out[1][1][0] == doctest::Approx(100.0));
  CHECK(a.I[1][0] == doctest::Approx(0.1));
  CHECK(a.I[2][0] == doctest::Approx(0.1));
}

TEST_CASE("power-to-gas cycle is resolved by the simultaneous solve") {
  auto l = power_to_gas();
  auto sys = build_asis_system(l.system, l.flows);
  auto a = compute_asis(l.system, l.flows);
  // Fixed point of I_e * 1.1 = 0.5 + 0.2 * I_g and I_g * 0.35 = 0.5 * I_e.
  double ie = 0.0, ig = 0.0;
  for (int k = 0; k < 500; ++k) {
    ie = (0.5 + 0.2 * ig) / 1.1;
    ig = 0.5 * ie / 0.35;
  }
  for (int t = 0; t < 2; ++t) {
    CHECK(a.I[0][t] == doctest::Approx(ie).epsilon(1e-12));
    CHECK(a.I[1][t] == doctest::Approx(ig).epsilon(1e-12));
  }
  CHECK(a.max_residual <= 1e-9);
  CHECK(sys.A.rows() == sys.A.cols());
  check_conservation(l.system, l.flows, a);
}

TEST_CASE("unproduced commodities are pinned and flagged") {
  auto l = power_to_gas();
  for (int t = 0; t < 2; ++t) {
    l.flows.E_in[2][0][t] = 0.0;
    l.flows.E_out[2][0][t] = 0.0;
  }
  l.flows.E_out[1][0][1] = 0.0;  // no gas produced at step 1
  l.flows.E_in[4][0][1] = 0.0;
  auto a = compute_asis(l.system, l.flows);
  CHECK(a.thresholded[1][1] == 1);
  CHECK(a.I[1][1] == 0.0);
  CHECK(a.thresholded[1][0] == 0);
}

TEST_CASE("SC scenario 1 intensity while lignite alone") {
  auto s = make_sc_system(1);
  auto r = solve_dispatch(s);
  auto a = compute_asis(s, r);
  CHECK(a.I[cidx(s, "elec")][2] == doctest::Approx(0.41 / 0.45).epsilon(1e-9));
  check_conservation(s, r.flows, a);
}

TEST_CASE("MC scenario 1 intensity without storage discharge") {
  auto s = make_mc_system(1);
  auto r = solve_dispatch(s);
  auto a = compute_asis(s, r);
  const int st = pidx(s, "heat_store");
  for (int t = 0; t < s.horizon; ++t) {
    CHECK(a.I[cidx(s, "elec")][t] == doctest::Approx(0.25).epsilon(1e-9));
    if (r.flows.E_out[st][0][t] <= 1e-9)
      CHECK(a.I[cidx(s, "heat")][t] == doctest::Approx(0.25).epsilon(1e-9));
  }
}

TEST_CASE("MC scenario 2 day one is CO2 free and one mixed hour follows") {
  auto s = make_mc_system(2);
  auto r = solve_dispatch(s);
  auto a = compute_asis(s, r);
  const int st = pidx(s, "heat_store");
  for (int t = 0; t < 24; ++t) {
    CHECK(a.I[cidx(s, "elec")][t] == 0.0);
    CHECK(a.I[cidx(s, "heat")][t] == 0.0);
    CHECK(a.I_stor[st][t] == 0.0);
  }
  int mixed = 0;
  for (int t = 24; t < 48; ++t) {
    const double ih = a.I[cidx(s, "heat")][t];
    if (ih > 1e-6 && ih < 0.25 - 1e-6) {
      ++mixed;
      CHECK(ih == doctest::Approx(0.14).epsilon(0.02 / 0.14));
    }
  }
  CHECK(mixed == 1);
  check_conservation(s, r.flows, a);
}

TEST_CASE("properties on randomized systems") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    auto s = co2i::testing::random_system(rng);
    auto r = solve_dispatch(s);
    auto a = compute_asis(s, r);
    check_conservation(s, r.flows, a);

    for (size_t c = 0; c < s.commodities.size(); ++c)
      for (int t = 0; t < s.horizon; ++t) {
        CHECK(a.I[c][t] >= -1e-9);
        if (a.thresholded[c][t]) continue;
        // Weighted-mean bound over producing processes.
        double lo = 1e300, hi = -1e300;
        for (size_t p = 0; p < s.processes.size(); ++p)
          for (size_t k = 0; k < s.processes[p].outputs.size(); ++k) {
            if (s.processes[p].outputs[k].commodity != s.commodities[c].id) continue;
            const double e = r.flows.E_out[p][k][t];
            if (e < 1e-9) continue;
            const double ratio = a.M_out[p][k][t] / (1000.0 * e);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
          }
        CHECK(a.I[c][t] >= lo - 1e-9);
        CHECK(a.I[c][t] <= hi + 1e-9);
      }

    for (size_t p = 0; p < s.processes.size(); ++p) {
      if (s.processes[p].kind != ProcessKind::Storage) continue;
      for (int t = 0; t < s.horizon; ++t) CHECK(a.M_stor[p][t] >= -1e-6);
      for (int t = 1; t < s.horizon; ++t) {
        const bool charging = r.flows.E_in[p][0][t] > 1e-9;
        if (!charging && !a.stor_thresholded[p][t] && !a.stor_thresholded[p][t - 1])
          CHECK(a.I_stor[p][t] >= a.I_stor[p][t - 1] - 1e-9);
      }
    }
  }
}

TEST_CASE("zero-emission systems have zero intensities") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = co2i::testing::random_system(rng, true);
    for (auto& p : s.processes)
      if (p.storage) p.storage->initial_co2 = 0.0;
    auto r = solve_dispatch(s);
    auto a = compute_asis(s, r);
    for (const auto& row : a.I)
      for (double v : row) CHECK(std::abs(v) <= 1e-12);
  }
}

TEST_CASE("initial storage intensity comes from the initial stored CO2") {
  EnergySystem s;
  s.name = "init";
  s.horizon = 2;
  s.commodities = {{"elec", "Electricity"}};
  auto st = process("store", ProcessKind::Storage, {"elec"}, {output("elec", 1.0, kUnbounded, 0, 0)});
  StorageParams sp;
  sp.energy_capacity = 2.0;
  sp.initial_level = 1.0;
  sp.initial_co2 = 300.0;  // 0.3 t/MWh
  st.storage = sp;
  s.processes = {process("grid", ProcessKind::Import, {}, {output("elec", 1.0, kUnbounded, 5.0, 0.9)}), st,
                 process("load", ProcessKind::Demand, {"elec"}, {})};
  s.demands["load"] = {0.5, 1.0};
  auto r = solve_dispatch(s);
  auto a = compute_asis(s, r);
  // The free stored energy is used first.
  CHECK(r.flows.E_out[1][0][0] == doctest::Approx(0.5));
  CHECK(a.I[0][0] == doctest::Approx(0.3));
  CHECK(a.I_stor[1][0] == doctest::Approx(0.3));
  check_conservation(s, r.flows, a);
}
