#pragma once

// Long-format result table: one row per (series, t). Series names:
//   gen:<process>:<commodity>    energy produced per step [GWh]
//   cons:<process>:<commodity>   energy consumed per step [GWh]
//   level:<storage>              storage level at the end of the step [GWh]
//   asis:<commodity>             as-is intensity [t/MWh]
//   asis_stor:<storage>          storage intensity [t/MWh]
//   whatif:<commodity>           marginal intensity [t/MWh]
//   whatif_fd:<commodity>        forward difference, with --fd-check
//   fd_delta:<commodity>         whatif - whatif_fd, with --fd-check

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "co2i/asis.hpp"
#include "co2i/whatif.hpp"

namespace co2i {

enum class Flag { Ok, Thresholded, Degenerate };
const char* to_string(Flag flag);
std::optional<Flag> parse_flag(const std::string& text);

struct ResultRow {
  std::string scenario;
  std::string series;
  int t = 0;
  double value = 0.0;
  std::string unit;
  Flag flag = Flag::Ok;
  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  bool operator==(const ResultTable&) const = default;

  void add(const std::string& scenario, const std::string& series, const std::vector<double>& values,
           const std::string& unit, const std::vector<Flag>& flags = {});
  /// Rows of one series ordered by t.
  std::vector<ResultRow> series(const std::string& name) const;
};

ResultTable flow_table(const EnergySystem& system, const DispatchResult& dispatch);
void append_asis(ResultTable& table, const EnergySystem& system, const AsIsResult& asis);
void append_whatif(ResultTable& table, const EnergySystem& system, const WhatIfResult& whatif,
                   bool with_fd = false);

/// Header scenario,series,t,value,unit,flag; values with 17 significant digits.
void write_csv(const ResultTable& table, std::ostream& out);
void write_csv(const ResultTable& table, const std::filesystem::path& path);
/// Throws std::runtime_error on a malformed table.
ResultTable read_result_csv(std::istream& in);
ResultTable read_result_csv(const std::filesystem::path& path);

}  // namespace co2i
