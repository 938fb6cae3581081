#pragma once

// Sectioned text format for energy systems.
//
//   [horizon]                 name, steps, step_hours
//   [commodities]             <id> = <display name>
//   [processes.<id>]          kind, inputs (comma separated)
//   [processes.<id>.output.<commodity>]
//                             efficiency, efficiency_min, capacity,
//                             variable_cost, emission_factor, availability
//   [processes.<id>.storage]  charge_efficiency, self_discharge,
//                             energy_capacity, initial_level, initial_co2
//   [profiles]                <name> = <series>
//   [demands]                 <demand process id> = <series>
//
// A series is an inline comma-separated list, the name of a profile, or
// file:<path>:<column> naming a column of a CSV file with a header row and
// one row per step (relative paths resolve against the scenario file).
// Lines starting with '#' or ';' are comments. Units: GW, GWh, hours, t/MWh.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "co2i/system_model.hpp"

namespace co2i {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& section, const std::string& what);
  std::string source;
  int line = 0;
  std::string section;
};

/// Throws ParseError on syntax problems and ValidationError when the parsed
/// system fails validate().
EnergySystem load_scenario(const std::filesystem::path& path);
EnergySystem parse_scenario(std::istream& in, const std::string& source = "<input>",
                            const std::filesystem::path& base_dir = ".");

/// Writes every number with 17 significant digits; load(save(s)) == s.
void save_scenario(const EnergySystem& system, const std::filesystem::path& path);
void write_scenario(const EnergySystem& system, std::ostream& out);

/// RFC 4180 records. The reader accepts quoted fields with embedded commas,
/// doubled quotes and line breaks, and CRLF or LF line ends.
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::string csv_field(const std::string& text);

}  // namespace co2i
