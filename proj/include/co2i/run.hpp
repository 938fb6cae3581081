#pragma once

// Dispatch plus the requested analyses, as driven by the command line.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "co2i/results.hpp"

namespace co2i {

enum class Method { AsIs, WhatIf, Both };
std::optional<Method> parse_method(const std::string& text);
const char* to_string(Method method);

struct RunOptions {
  std::optional<std::filesystem::path> scenario;  // else `builtin`
  std::string builtin;
  Method method = Method::Both;
  std::filesystem::path out = "results";
  bool fd_check = false;
  int fd_sample = 0;              // 0 checks every entry
  std::optional<double> tol;      // degeneracy tolerance [t/MWh]
  bool json_manifest = false;     // also print the manifest to stdout
  bool parallel = false;
};

struct RunOutput {
  EnergySystem system;
  DispatchResult dispatch;
  std::optional<AsIsResult> asis;
  std::optional<WhatIfResult> whatif;
  std::optional<FdCheckResult> fd;
  ResultTable table;
  nlohmann::json manifest;
};

/// Loads the system and runs everything in memory. Throws ParseError,
/// ValidationError, InfeasibleSystem, UnboundedModel.
RunOutput run_analysis(const RunOptions& options);

/// run_analysis, then writes results.csv and manifest.json into options.out.
/// Returns the process exit code; diagnostics go to `err`.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace co2i
