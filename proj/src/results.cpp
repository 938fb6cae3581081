#include "co2i/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "co2i/scenario_io.hpp"

namespace co2i {

const char* to_string(Flag flag) {
  switch (flag) {
    case Flag::Ok: return "ok";
    case Flag::Thresholded: return "thresholded";
    case Flag::Degenerate: return "degenerate";
  }
  return "?";
}

std::optional<Flag> parse_flag(const std::string& text) {
  if (text == "ok") return Flag::Ok;
  if (text == "thresholded") return Flag::Thresholded;
  if (text == "degenerate") return Flag::Degenerate;
  return std::nullopt;
}

void ResultTable::add(const std::string& scenario, const std::string& name,
                      const std::vector<double>& values, const std::string& unit,
                      const std::vector<Flag>& flags) {
  for (size_t t = 0; t < values.size(); ++t)
    rows.push_back({scenario, name, static_cast<int>(t), values[t], unit,
                    flags.empty() ? Flag::Ok : flags[t]});
}

std::vector<ResultRow> ResultTable::series(const std::string& name) const {
  std::vector<ResultRow> out;
  for (const auto& r : rows)
    if (r.series == name) out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

namespace {

// Solver round-off such as -1e-17 is reported as zero.
std::vector<double> clean(std::vector<double> v) {
  for (double& x : v)
    if (std::abs(x) < 1e-12) x = 0.0;
  return v;
}

std::vector<Flag> flags_of(const std::vector<char>& pinned) {
  std::vector<Flag> f;
  for (char p : pinned) f.push_back(p ? Flag::Thresholded : Flag::Ok);
  return f;
}

}  // namespace

ResultTable flow_table(const EnergySystem& s, const DispatchResult& d) {
  ResultTable table;
  for (size_t p = 0; p < s.processes.size(); ++p) {
    const auto& proc = s.processes[p];
    for (size_t k = 0; k < proc.outputs.size(); ++k)
      table.add(s.name, "gen:" + proc.id + ":" + proc.outputs[k].commodity, clean(d.flows.E_out[p][k]), "GWh");
    for (size_t k = 0; k < proc.inputs.size(); ++k)
      table.add(s.name, "cons:" + proc.id + ":" + proc.inputs[k], clean(d.flows.E_in[p][k]), "GWh");
    if (proc.kind == ProcessKind::Storage) table.add(s.name, "level:" + proc.id, clean(d.flows.SL[p]), "GWh");
  }
  return table;
}

void append_asis(ResultTable& table, const EnergySystem& s, const AsIsResult& a) {
  for (size_t c = 0; c < s.commodities.size(); ++c)
    table.add(s.name, "asis:" + s.commodities[c].id, a.I[c], "t/MWh", flags_of(a.thresholded[c]));
  for (size_t p = 0; p < s.processes.size(); ++p)
    if (s.processes[p].kind == ProcessKind::Storage)
      table.add(s.name, "asis_stor:" + s.processes[p].id, a.I_stor[p], "t/MWh",
                flags_of(a.stor_thresholded[p]));
}

void append_whatif(ResultTable& table, const EnergySystem& s, const WhatIfResult& w, bool with_fd) {
  for (size_t c = 0; c < s.commodities.size(); ++c) {
    const auto& entries = w.entries[c];
    if (std::none_of(entries.begin(), entries.end(), [](const auto& e) { return e.has_value(); })) continue;
    std::vector<double> v, fd, delta;
    std::vector<Flag> f;
    for (const auto& e : entries) {
      v.push_back(e ? e->value : std::nan(""));
      f.push_back(e && e->degenerate ? Flag::Degenerate : Flag::Ok);
      const double fwd = e && e->fd_forward ? *e->fd_forward : std::nan("");
      fd.push_back(fwd);
      delta.push_back(v.back() - fwd);
    }
    const std::string& id = s.commodities[c].id;
    table.add(s.name, "whatif:" + id, v, "t/MWh", f);
    if (with_fd) {
      table.add(s.name, "whatif_fd:" + id, fd, "t/MWh", f);
      table.add(s.name, "fd_delta:" + id, delta, "t/MWh", f);
    }
  }
}

void write_csv(const ResultTable& table, std::ostream& out) {
  out << "scenario,series,t,value,unit,flag\n";
  char buf[32];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << csv_field(r.scenario) << ',' << csv_field(r.series) << ',' << r.t << ',' << buf << ','
        << csv_field(r.unit) << ',' << to_string(r.flag) << '\n';
  }
}

void write_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write_csv(table, f);
}

ResultTable read_result_csv(std::istream& in) {
  const auto records = read_csv(in);
  const std::vector<std::string> header{"scenario", "series", "t", "value", "unit", "flag"};
  if (records.empty() || records[0] != header) throw std::runtime_error("unexpected result table header");
  ResultTable table;
  for (size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "result table record " + std::to_string(i + 1);
    if (r.size() != header.size()) throw std::runtime_error(where + ": expected 6 fields");
    ResultRow row;
    row.scenario = r[0];
    row.series = r[1];
    char* end = nullptr;
    row.t = static_cast<int>(std::strtol(r[2].c_str(), &end, 10));
    if (r[2].empty() || *end) throw std::runtime_error(where + ": bad step '" + r[2] + "'");
    row.value = std::strtod(r[3].c_str(), &end);
    if (r[3].empty() || *end) throw std::runtime_error(where + ": bad value '" + r[3] + "'");
    row.unit = r[4];
    const auto flag = parse_flag(r[5]);
    if (!flag) throw std::runtime_error(where + ": bad flag '" + r[5] + "'");
    row.flag = *flag;
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable read_result_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return read_result_csv(f);
}

}  // namespace co2i
