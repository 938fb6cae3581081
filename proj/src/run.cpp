#include "co2i/run.hpp"

#include <fstream>
#include <ostream>

#include "co2i/scenario_io.hpp"

namespace co2i {

std::optional<Method> parse_method(const std::string& text) {
  if (text == "asis") return Method::AsIs;
  if (text == "whatif") return Method::WhatIf;
  if (text == "both") return Method::Both;
  return std::nullopt;
}

const char* to_string(Method method) {
  switch (method) {
    case Method::AsIs: return "asis";
    case Method::WhatIf: return "whatif";
    case Method::Both: return "both";
  }
  return "?";
}

RunOutput run_analysis(const RunOptions& o) {
  RunOutput r;
  r.system = o.scenario ? load_scenario(*o.scenario) : make_builtin(o.builtin);
  auto& m = r.manifest;
  m["scenario"] = {{"name", r.system.name},
                   {"source", o.scenario ? o.scenario->string() : "builtin:" + o.builtin},
                   {"steps", r.system.horizon},
                   {"step_hours", r.system.step_hours},
                   {"commodities", r.system.commodities.size()},
                   {"processes", r.system.processes.size()}};
  m["method"] = to_string(o.method);

  lp::counters().reset();
  DispatchOptions dopt;
  r.dispatch = solve_dispatch(r.system, dopt);
  const auto cert = lp::certify(r.dispatch.lp, r.dispatch.sol);
  m["dispatch"] = {{"status", lp::to_string(r.dispatch.sol.status)},
                   {"M_tot_t", r.dispatch.M_tot},
                   {"cost", r.dispatch.cost},
                   {"objective", r.dispatch.sol.objective},
                   {"rows", r.dispatch.lp.num_rows()},
                   {"cols", r.dispatch.lp.num_cols()},
                   {"iterations", r.dispatch.sol.iterations},
                   {"bland", r.dispatch.sol.used_bland},
                   {"tie_break", dopt.tie_break},
                   {"primal_infeasibility", cert.primal_infeasibility},
                   {"dual_residual", cert.dual_residual},
                   {"complementary_slackness", cert.complementary_slackness},
                   {"duality_gap", cert.duality_gap}};
  const auto& lpo = dopt.lp;
  m["tolerances"] = {{"lp_feasibility", lpo.feasibility_tol},
                     {"lp_optimality", lpo.optimality_tol},
                     {"lp_pivot", lpo.pivot_tol}};

  r.table = flow_table(r.system, r.dispatch);
  if (o.method != Method::WhatIf) {
    AsIsOptions aopt;
    r.asis = compute_asis(r.system, r.dispatch, aopt);
    const auto bal = co2_balance(r.system, r.dispatch.flows, *r.asis);
    int pinned = 0;
    for (const auto& row : r.asis->thresholded)
      for (char f : row) pinned += f;
    m["tolerances"]["asis_epsilon_GWh"] = aopt.epsilon;
    m["asis"] = {{"max_equation_residual", r.asis->max_residual},
                 {"thresholded_entries", pinned},
                 {"conservation",
                  {{"emitted_t", bal.emitted},
                   {"initial_stored_t", bal.initial_stored},
                   {"delivered_t", bal.delivered},
                   {"final_stored_t", bal.final_stored},
                   {"dropped_t", bal.dropped},
                   {"residual_t", bal.residual()}}}};
    append_asis(r.table, r.system, *r.asis);
  }
  if (o.method != Method::AsIs) {
    WhatIfOptions wopt;
    if (o.tol) wopt.tol_deg = *o.tol;
    wopt.parallel = o.parallel;
    r.whatif = compute_whatif(r.system, r.dispatch, wopt);
    int pivots = 0;
    for (const auto& row : r.whatif->entries)
      for (const auto& e : row) pivots += e ? e->pivots : 0;
    m["tolerances"]["tol_deg"] = wopt.tol_deg;
    m["tolerances"]["fd_rel_step"] = wopt.fd_rel_step;
    m["whatif"] = {{"entries", r.whatif->entry_count()},
                   {"degenerate", r.whatif->degenerate_count()},
                   {"fd_fallbacks", r.whatif->fallback_count()},
                   {"continuation_pivots", pivots},
                   {"fd_step_GWh", r.whatif->fd_step}};
    m["counters_after_whatif"] = {{"lp_solves", lp::counters().lp_solves.load()},
                                  {"basis_factorizations", lp::counters().basis_factorizations.load()}};
    if (o.fd_check) {
      r.fd = fd_check(r.system, r.dispatch, *r.whatif, o.fd_sample, wopt);
      m["fd_check"] = {{"checked", r.fd->entries.size()},
                       {"lp_solves", r.fd->lp_solves},
                       {"max_abs_delta", r.fd->max_abs_delta},
                       {"degenerate", r.fd->degenerate},
                       {"disagreements", r.fd->disagreements}};
    }
    append_whatif(r.table, r.system, *r.whatif, o.fd_check);
  }
  m["counters"] = {{"lp_solves", lp::counters().lp_solves.load()},
                   {"basis_factorizations", lp::counters().basis_factorizations.load()}};
  m["files"] = {"results.csv", "manifest.json"};
  return r;
}

int run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunOutput r;
  try {
    r = run_analysis(o);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    std::filesystem::create_directories(o.out);
    write_csv(r.table, o.out / "results.csv");
    std::ofstream mf(o.out / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write " + (o.out / "manifest.json").string());
    mf << r.manifest.dump(2) << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  if (o.json_manifest) out << r.manifest.dump(2) << "\n";
  else
    out << r.system.name << ": M_tot = " << r.dispatch.M_tot << " t, " << r.table.rows.size()
        << " rows written to " << (o.out / "results.csv").string() << "\n";
  if (r.fd && r.fd->disagreements > 0) {
    err << "fd-check: " << r.fd->disagreements << " entries disagree with re-dispatch\n";
    return 4;
  }
  return 0;
}

}  // namespace co2i
