#include "co2i/scenario_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace co2i {

ParseError::ParseError(const std::string& src, int ln, const std::string& sec, const std::string& what)
    : std::runtime_error(src + ":" + std::to_string(ln) + (sec.empty() ? "" : " [" + sec + "]") +
                         ": " + what),
      source(src),
      line(ln),
      section(sec) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Entry {
  std::string value;
  int line;
};

// Key/value pairs of one section in file order.
struct Section {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, Entry>> keys;
};

class Parser {
 public:
  Parser(std::string source, std::filesystem::path base) : source_(std::move(source)), base_(std::move(base)) {}

  EnergySystem parse(std::istream& in) {
    read_sections(in);
    EnergySystem s;
    std::vector<Section*> process_sections;
    for (auto& sec : sections_) {
      if (sec.name == "horizon") horizon(sec, s);
      else if (sec.name == "commodities") {
        for (auto& [k, e] : sec.keys) s.commodities.push_back({k, e.value});
      } else if (sec.name == "profiles") {
        for (auto& [k, e] : sec.keys) profiles_[k] = e;
      } else if (sec.name == "demands") {
        demands_ = &sec;
      } else if (sec.name.rfind("processes.", 0) == 0) {
        process_sections.push_back(&sec);
      } else {
        throw ParseError(source_, sec.line, sec.name, "unknown section");
      }
    }
    for (auto* sec : process_sections) process(*sec, s);
    if (demands_)
      for (auto& [k, e] : demands_->keys) {
        const int p = s.process_index(k);
        if (p < 0 || s.processes[p].kind != ProcessKind::Demand)
          throw ParseError(source_, e.line, "demands", "'" + k + "' is not a demand process");
        s.demands[k] = series(e, "demands");
      }
    require_valid(s);
    return s;
  }

 private:
  void read_sections(std::istream& in) {
    std::string raw;
    int ln = 0;
    std::set<std::string> seen;
    while (std::getline(in, raw)) {
      ++ln;
      const std::string line = trim(raw);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError(source_, ln, "", "unterminated section header");
        const std::string name = trim(line.substr(1, line.size() - 2));
        if (name.empty()) throw ParseError(source_, ln, "", "empty section name");
        if (!seen.insert(name).second) throw ParseError(source_, ln, name, "duplicate section");
        sections_.push_back({name, ln, {}});
        continue;
      }
      if (sections_.empty()) throw ParseError(source_, ln, "", "key outside of any section");
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(source_, ln, sections_.back().name, "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ParseError(source_, ln, sections_.back().name, "empty key");
      auto& keys = sections_.back().keys;
      for (const auto& [k, e] : keys)
        if (k == key) throw ParseError(source_, ln, sections_.back().name, "duplicate key '" + key + "'");
      keys.push_back({key, {trim(line.substr(eq + 1)), ln}});
    }
  }

  [[noreturn]] void unknown_key(const Section& sec, const std::string& key, int ln) {
    throw ParseError(source_, ln, sec.name, "unknown key '" + key + "'");
  }

  double number(const Entry& e, const std::string& sec) {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw ParseError(source_, e.line, sec, "not a number: '" + v + "'");
    return x;
  }

  std::vector<double> numbers(const std::string& text, int ln, const std::string& sec) {
    std::vector<double> v;
    for (const auto& part : split(text, ',')) v.push_back(number({part, ln}, sec));
    return v;
  }

  std::vector<double> series(const Entry& e, const std::string& sec, int depth = 0) {
    const std::string v = trim(e.value);
    if (v.empty()) return {};
    if (v.rfind("file:", 0) == 0) return csv_column(v.substr(5), e.line, sec);
    const char c = v[0];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')
      return numbers(v, e.line, sec);
    const auto it = profiles_.find(v);
    if (it == profiles_.end() || depth > 0)
      throw ParseError(source_, e.line, sec, "unknown profile '" + v + "'");
    return series(it->second, "profiles", depth + 1);
  }

  std::vector<double> csv_column(const std::string& ref, int ln, const std::string& sec) {
    const auto colon = ref.rfind(':');
    if (colon == std::string::npos)
      throw ParseError(source_, ln, sec, "expected file:<path>:<column>, got 'file:" + ref + "'");
    std::filesystem::path path = ref.substr(0, colon);
    const std::string column = ref.substr(colon + 1);
    if (path.is_relative()) path = base_ / path;
    std::ifstream f(path);
    if (!f) throw ParseError(source_, ln, sec, "cannot open profile file '" + path.string() + "'");
    const auto rows = read_csv(f);
    if (rows.empty()) throw ParseError(source_, ln, sec, "empty profile file '" + path.string() + "'");
    int col = -1;
    for (size_t j = 0; j < rows[0].size(); ++j)
      if (trim(rows[0][j]) == column) col = static_cast<int>(j);
    if (col < 0)
      throw ParseError(source_, ln, sec, "no column '" + column + "' in '" + path.string() + "'");
    std::vector<double> v;
    for (size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() == 1 && trim(rows[r][0]).empty()) continue;
      if (static_cast<int>(rows[r].size()) <= col)
        throw ParseError(source_, ln, sec, path.string() + " row " + std::to_string(r + 1) + " is short");
      v.push_back(number({rows[r][col], ln}, sec));
    }
    return v;
  }

  void horizon(const Section& sec, EnergySystem& s) {
    for (const auto& [k, e] : sec.keys) {
      if (k == "name") s.name = e.value;
      else if (k == "steps") {
        const double n = number(e, sec.name);
        if (n != std::floor(n) || n < 1 || n > 1e7)
          throw ParseError(source_, e.line, sec.name, "steps must be a positive integer");
        s.horizon = static_cast<int>(n);
      } else if (k == "step_hours") s.step_hours = number(e, sec.name);
      else unknown_key(sec, k, e.line);
    }
  }

  void process(const Section& sec, EnergySystem& s) {
    const auto parts = split(sec.name, '.');
    if (parts.size() < 2 || parts[1].empty())
      throw ParseError(source_, sec.line, sec.name, "missing process id");
    const std::string& id = parts[1];
    int p = s.process_index(id);
    if (parts.size() == 2) {
      if (p >= 0) throw ParseError(source_, sec.line, sec.name, "duplicate process");
      Process proc;
      proc.id = id;
      bool kind = false;
      for (const auto& [k, e] : sec.keys) {
        if (k == "kind") {
          const auto pk = parse_process_kind(e.value);
          if (!pk) throw ParseError(source_, e.line, sec.name, "unknown kind '" + e.value + "'");
          proc.kind = *pk;
          kind = true;
        } else if (k == "inputs") {
          if (!e.value.empty()) proc.inputs = split(e.value, ',');
        } else {
          unknown_key(sec, k, e.line);
        }
      }
      if (!kind) throw ParseError(source_, sec.line, sec.name, "missing key 'kind'");
      s.processes.push_back(std::move(proc));
      return;
    }
    if (p < 0)
      throw ParseError(source_, sec.line, sec.name, "section precedes [processes." + id + "]");
    Process& proc = s.processes[static_cast<size_t>(p)];
    if (parts.size() == 4 && parts[2] == "output") {
      OutputSpec o;
      o.commodity = parts[3];
      for (const auto& [k, e] : sec.keys) {
        if (k == "efficiency") o.efficiency = number(e, sec.name);
        else if (k == "efficiency_min") o.efficiency_min = number(e, sec.name);
        else if (k == "capacity") o.capacity = number(e, sec.name);
        else if (k == "variable_cost") o.variable_cost = number(e, sec.name);
        else if (k == "emission_factor") o.emission_factor = number(e, sec.name);
        else if (k == "availability") o.availability = series(e, sec.name);
        else unknown_key(sec, k, e.line);
      }
      proc.outputs.push_back(std::move(o));
    } else if (parts.size() == 3 && parts[2] == "storage") {
      StorageParams sp;
      for (const auto& [k, e] : sec.keys) {
        if (k == "charge_efficiency") sp.charge_efficiency = number(e, sec.name);
        else if (k == "self_discharge") sp.self_discharge = number(e, sec.name);
        else if (k == "energy_capacity") sp.energy_capacity = number(e, sec.name);
        else if (k == "initial_level") sp.initial_level = number(e, sec.name);
        else if (k == "initial_co2") sp.initial_co2 = number(e, sec.name);
        else unknown_key(sec, k, e.line);
      }
      proc.storage = sp;
    } else {
      throw ParseError(source_, sec.line, sec.name, "unknown section");
    }
  }

  std::string source_;
  std::filesystem::path base_;
  std::vector<Section> sections_;
  std::map<std::string, Entry> profiles_;
  const Section* demands_ = nullptr;
};

}  // namespace

EnergySystem parse_scenario(std::istream& in, const std::string& source,
                            const std::filesystem::path& base_dir) {
  return Parser(source, base_dir).parse(in);
}

EnergySystem load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path.string(), 0, "", "cannot open scenario file");
  return parse_scenario(f, path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

void write_scenario(const EnergySystem& s, std::ostream& out) {
  out << "[horizon]\nname = " << s.name << "\nsteps = " << s.horizon
      << "\nstep_hours = " << fmt(s.step_hours) << "\n\n[commodities]\n";
  for (const auto& c : s.commodities) out << c.id << " = " << c.name << "\n";

  bool profiles = false;
  for (const auto& p : s.processes)
    for (const auto& o : p.outputs) profiles |= !o.availability.empty();
  if (profiles) {
    out << "\n[profiles]\n";
    for (const auto& p : s.processes)
      for (const auto& o : p.outputs)
        if (!o.availability.empty()) out << p.id << "." << o.commodity << " = " << join(o.availability) << "\n";
  }

  for (const auto& p : s.processes) {
    out << "\n[processes." << p.id << "]\nkind = " << to_string(p.kind) << "\n";
    if (!p.inputs.empty()) {
      out << "inputs = ";
      for (size_t i = 0; i < p.inputs.size(); ++i) out << (i ? ", " : "") << p.inputs[i];
      out << "\n";
    }
    for (const auto& o : p.outputs) {
      out << "\n[processes." << p.id << ".output." << o.commodity << "]\n"
          << "efficiency = " << fmt(o.efficiency) << "\n";
      if (o.efficiency_min) out << "efficiency_min = " << fmt(*o.efficiency_min) << "\n";
      out << "capacity = " << fmt(o.capacity) << "\nvariable_cost = " << fmt(o.variable_cost)
          << "\nemission_factor = " << fmt(o.emission_factor) << "\n";
      if (!o.availability.empty()) out << "availability = " << p.id << "." << o.commodity << "\n";
    }
    if (p.storage) {
      const auto& sp = *p.storage;
      out << "\n[processes." << p.id << ".storage]\n"
          << "charge_efficiency = " << fmt(sp.charge_efficiency) << "\n"
          << "self_discharge = " << fmt(sp.self_discharge) << "\n"
          << "energy_capacity = " << fmt(sp.energy_capacity) << "\n"
          << "initial_level = " << fmt(sp.initial_level) << "\n"
          << "initial_co2 = " << fmt(sp.initial_co2) << "\n";
    }
  }

  if (!s.demands.empty()) {
    out << "\n[demands]\n";
    for (const auto& [id, d] : s.demands) out << id << " = " << join(d) << "\n";
  }
}

void save_scenario(const EnergySystem& system, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write_scenario(system, f);
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char ch;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch != '"') field += ch;
      else if (in.peek() == '"') field += static_cast<char>(in.get());
      else quoted = false;
      continue;
    }
    any = true;
    if (ch == '"') quoted = true;
    else if (ch == ',') end_field();
    else if (ch == '\n') end_row();
    else if (ch == '\r' && in.peek() == '\n') continue;
    else field += ch;
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  if (any) end_row();
  return rows;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string q = "\"";
  for (char c : text) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace co2i
