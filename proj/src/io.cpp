#include "rarefan/io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace rarefan {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string strip(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool bare_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

TomlValue parse_value(const std::string& tok, const std::string& origin, int line) {
  if (tok.empty()) fail_at(origin, line, "missing value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') fail_at(origin, line, "unterminated string");
    std::string out;
    for (std::size_t k = 1; k + 1 < tok.size(); ++k) {
      const char c = tok[k];
      if (c == '\\') {
        if (k + 2 >= tok.size()) fail_at(origin, line, "dangling escape in string");
        switch (tok[++k]) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: fail_at(origin, line, "unsupported escape in string");
        }
      } else if (c == '"') {
        fail_at(origin, line, "unexpected quote inside string");
      } else {
        out.push_back(c);
      }
    }
    return out;
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  const char* const first = tok.data();
  const char* const last = first + tok.size();
  if (tok.find_first_of(".eE") == std::string::npos) {
    long long i = 0;
    const auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec == std::errc() && ptr == last) return i;
  }
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, d);
  if (ec == std::errc() && ptr == last) {
    if (!std::isfinite(d)) fail_at(origin, line, "value must be finite");
    return d;
  }
  fail_at(origin, line, "cannot parse value '" + tok + "'");
}

// Accessor over a parsed document that tracks which keys were consumed so
// unknown keys can be reported as errors.
class TomlReader {
 public:
  TomlReader(TomlDoc doc, std::string origin) : doc_(std::move(doc)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return doc_.values.count(key) != 0; }

  double number(const std::string& key) {
    const TomlValue& v = require(key);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
    type_error(key, "a number");
  }
  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  long long integer(const std::string& key) {
    const TomlValue& v = require(key);
    if (const auto* i = std::get_if<long long>(&v)) return *i;
    type_error(key, "an integer");
  }
  long long integer_or(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }
  std::string text(const std::string& key) {
    const TomlValue& v = require(key);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    type_error(key, "a string");
  }

  void finish() const {
    for (const auto& [key, value] : doc_.values)
      if (!used_.count(key)) throw ConfigError(origin_ + ": unknown key '" + key + "'");
  }

 private:
  const TomlValue& require(const std::string& key) {
    const auto it = doc_.values.find(key);
    if (it == doc_.values.end())
      throw ConfigError(origin_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }
  [[noreturn]] void type_error(const std::string& key, const char* want) const {
    throw ConfigError(origin_ + ": key '" + key + "' must be " + want);
  }

  TomlDoc doc_;
  std::string origin_;
  std::set<std::string> used_;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_csv_double(const std::string& raw, const std::string& origin, int line) {
  const std::string tok = strip(raw);
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    fail_at(origin, line, "cannot parse number '" + tok + "'");
  return d;
}

void check_center(double got, double want, const std::string& origin, const char* axis) {
  if (std::abs(got - want) > 1e-9 * (1.0 + std::abs(want)))
    throw GridMismatch(origin + ": " + axis + " column does not match the grid cell centers");
}

const char* component_name(PerturbComponent c) {
  switch (c) {
    case PerturbComponent::Rho: return "rho";
    case PerturbComponent::M1: return "m1";
    case PerturbComponent::M2: return "m2";
    case PerturbComponent::None: break;
  }
  return "none";
}

PerturbComponent component_from_name(const std::string& name, const std::string& origin) {
  if (name == "rho") return PerturbComponent::Rho;
  if (name == "m1") return PerturbComponent::M1;
  if (name == "m2") return PerturbComponent::M2;
  if (name == "none") return PerturbComponent::None;
  throw ConfigError(origin + ": perturbation component must be rho, m1, m2, or none");
}

json law_to_json(const LawSpec& s) {
  if (s.kind == "gamma") return json{{"kind", "gamma"}, {"kappa", s.kappa}, {"gamma", s.gamma}};
  return json{{"kind", "table"}, {"path", s.table.string()}};
}

LawSpec law_from_json(const json& j, const std::string& origin) {
  LawSpec s;
  s.kind = j.at("kind").get<std::string>();
  if (s.kind == "gamma") {
    s.kappa = j.at("kappa").get<double>();
    s.gamma = j.at("gamma").get<double>();
  } else if (s.kind == "table") {
    s.table = j.at("path").get<std::string>();
  } else {
    throw ConfigError(origin + ": law kind must be gamma or table");
  }
  return s;
}

}  // namespace

TomlDoc parse_toml(const std::string& text, const std::string& origin) {
  TomlDoc doc;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line;
    bool quoted = false;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const char c = raw[k];
      if (c == '"' && (k == 0 || raw[k - 1] != '\\')) quoted = !quoted;
      if (c == '#' && !quoted) break;
      line.push_back(c);
    }
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_at(origin, lineno, "malformed section header");
      section = strip(line.substr(1, line.size() - 2));
      if (!bare_name(section)) fail_at(origin, lineno, "section names must be bare words");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_at(origin, lineno, "expected key = value");
    const std::string key = strip(line.substr(0, eq));
    if (!bare_name(key)) fail_at(origin, lineno, "keys must be bare words");
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.values.count(full)) fail_at(origin, lineno, "duplicate key '" + full + "'");
    doc.values.emplace(full, parse_value(strip(line.substr(eq + 1)), origin, lineno));
  }
  return doc;
}

PressureLaw make_law(const LawSpec& spec) {
  if (spec.kind == "gamma") return PressureLaw::gamma_law(spec.kappa, spec.gamma);
  if (spec.kind == "table") return read_pressure_table_csv(spec.table);
  throw ConfigError("law kind must be \"gamma\" or \"table\"");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string origin = path.string();
  TomlReader r(parse_toml(buf.str(), origin), origin);

  if (r.integer("schema") != 1)
    throw ConfigError(origin + ": unsupported config schema (expected schema = 1)");

  LawSpec spec;
  spec.kind = r.text("law.kind");
  if (spec.kind == "gamma") {
    spec.kappa = r.number("law.kappa");
    spec.gamma = r.number("law.gamma");
  } else if (spec.kind == "table") {
    fs::path table = r.text("law.path");
    if (table.is_relative()) table = path.parent_path() / table;
    spec.table = table.lexically_normal();
  } else {
    throw ConfigError(origin + ": law.kind must be \"gamma\" or \"table\"");
  }

  RiemannData data;
  const bool has_data = r.has("data.rho_l") || r.has("data.u1_l") || r.has("data.rho_r") ||
                        r.has("data.u1_r");
  if (has_data) {
    data.rho_l = r.number("data.rho_l");
    data.u1_l = r.number("data.u1_l");
    data.rho_r = r.number("data.rho_r");
    data.u1_r = r.number("data.u1_r");
    if (!(data.rho_l > 0.0) || !(data.rho_r > 0.0))
      throw ConfigError(origin + ": data densities must be positive");
  }

  Grid grid;
  const bool has_grid = r.has("grid.a") || r.has("grid.nx1") || r.has("grid.nx2");
  if (has_grid) {
    grid.a = r.number("grid.a");
    grid.nx1 = static_cast<int>(r.integer("grid.nx1"));
    grid.nx2 = static_cast<int>(r.integer_or("grid.nx2", 1));
    if (!(grid.a > 0.0)) throw ConfigError(origin + ": grid.a must be positive");
    if (grid.nx1 < 1 || grid.nx2 < 1) throw ConfigError(origin + ": grid sizes must be positive");
  }

  const double cfl = r.number_or("sim.cfl", 0.45);
  const double t_end = r.number_or("sim.t_end", 1.0);
  const double snapshot_every = r.number_or("sim.snapshot_every", 0.1);
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError(origin + ": sim.cfl must lie in (0,1)");
  if (!(t_end > 0.0)) throw ConfigError(origin + ": sim.t_end must be positive");
  if (!(snapshot_every > 0.0)) throw ConfigError(origin + ": sim.snapshot_every must be positive");

  Perturbation pert;
  if (r.has("perturbation.component")) {
    pert.component = component_from_name(r.text("perturbation.component"), origin);
    if (pert.component != PerturbComponent::None) {
      pert.amplitude = r.number("perturbation.amplitude");
      pert.mode = static_cast<int>(r.integer("perturbation.mode"));
    }
  }

  RunConfig cfg{spec, SimConfig{grid, make_law(spec), data, cfl, t_end, snapshot_every, pert}};
  cfg.has_data = has_data;
  cfg.has_grid = has_grid;
  cfg.exact_t = r.number_or("exact.t", cfg.exact_t);
  cfg.exact_samples = static_cast<int>(r.integer_or("exact.samples", cfg.exact_samples));
  if (!(cfg.exact_t > 0.0)) throw ConfigError(origin + ": exact.t must be positive");
  if (cfg.exact_samples < 1) throw ConfigError(origin + ": exact.samples must be positive");

  cfg.certify_rei_overridden = r.has("certify.tol_rei_coeff");
  cfg.certify_energy_overridden = r.has("certify.tol_energy_per_time");
  cfg.certify.tol_rei_coeff = r.number_or("certify.tol_rei_coeff", cfg.certify.tol_rei_coeff);
  cfg.certify.tol_energy_per_time =
      r.number_or("certify.tol_energy_per_time", cfg.certify.tol_energy_per_time);
  if (!(cfg.certify.tol_rei_coeff > 0.0) || !(cfg.certify.tol_energy_per_time > 0.0))
    throw ConfigError(origin + ": certify tolerances must be positive");

  r.finish();
  return cfg;
}

PressureLaw read_pressure_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pressure table " + path.string());
  const std::string origin = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(origin + ": empty pressure table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv(line).size() != 2) fail_at(origin, 1, "expected a two-column header");
  std::vector<double> rho;
  std::vector<double> p;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) fail_at(origin, lineno, "expected two columns");
    rho.push_back(parse_csv_double(cells[0], origin, lineno));
    p.push_back(parse_csv_double(cells[1], origin, lineno));
  }
  try {
    return PressureLaw::tabulated(std::move(rho), std::move(p));
  } catch (const DomainError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(const std::filesystem::path& path, const FieldState& field) {
  require_congruent(field, field.grid, "write_field_csv");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "x1,x2,rho,m1,m2\n";
  const Grid& g = field.grid;
  for (int j = 0; j < g.nx2; ++j)
    for (int i = 0; i < g.nx1; ++i) {
      const std::size_t k = g.index(i, j);
      out << format_double(g.x1_center(i)) << ',' << format_double(g.x2_center(j)) << ','
          << format_double(field.rho[k]) << ',' << format_double(field.m1[k]) << ','
          << format_double(field.m2[k]) << '\n';
    }
  if (!out) throw ConfigError("failed while writing " + path.string());
}

FieldState read_field_csv(const std::filesystem::path& path, const Grid& grid, double t) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot " + path.string());
  const std::string origin = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(origin + ": empty snapshot");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x1,x2,rho,m1,m2") throw ConfigError(origin + ": unexpected snapshot header");
  FieldState f = FieldState::zeros(grid, t);
  std::size_t row = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    if (row >= grid.size()) throw GridMismatch(origin + ": more rows than grid cells");
    const auto cells = split_csv(line);
    if (cells.size() != 5) fail_at(origin, lineno, "expected five columns");
    const int i = static_cast<int>(row % static_cast<std::size_t>(grid.nx1));
    const int j = static_cast<int>(row / static_cast<std::size_t>(grid.nx1));
    check_center(parse_csv_double(cells[0], origin, lineno), grid.x1_center(i), origin, "x1");
    check_center(parse_csv_double(cells[1], origin, lineno), grid.x2_center(j), origin, "x2");
    f.rho[row] = parse_csv_double(cells[2], origin, lineno);
    f.m1[row] = parse_csv_double(cells[3], origin, lineno);
    f.m2[row] = parse_csv_double(cells[4], origin, lineno);
    ++row;
  }
  if (row != grid.size()) throw GridMismatch(origin + ": row count does not match the grid");
  return f;
}

void write_exact_csv(const std::filesystem::path& path, const WaveFan& fan, double t,
                     double a, int samples) {
  if (!(t > 0.0)) throw DomainError("write_exact_csv: t must be positive");
  if (!(a > 0.0) || samples < 1) throw DomainError("write_exact_csv: bad sampling grid");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "x1,rho,u1,u2\n";
  const Grid g{a, samples, 1};
  for (int i = 0; i < samples; ++i) {
    const double x1 = g.x1_center(i);
    const FanPoint pt = fan.evaluate(x1 / t);
    out << format_double(x1) << ',' << format_double(pt.rho) << ',' << format_double(pt.u1)
        << ",0\n";
  }
  if (!out) throw ConfigError("failed while writing " + path.string());
}

FieldState read_exact_csv(const std::filesystem::path& path, double a, double t) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  const std::string origin = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(origin + ": empty sample file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x1,rho,u1,u2") throw ConfigError(origin + ": unexpected sample header");
  std::vector<std::array<double, 4>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (strip(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) fail_at(origin, lineno, "expected four columns");
    rows.push_back({parse_csv_double(cells[0], origin, lineno),
                    parse_csv_double(cells[1], origin, lineno),
                    parse_csv_double(cells[2], origin, lineno),
                    parse_csv_double(cells[3], origin, lineno)});
  }
  if (rows.empty()) throw ConfigError(origin + ": no samples");
  const Grid g{a, static_cast<int>(rows.size()), 1};
  FieldState f = FieldState::zeros(g, t);
  for (int i = 0; i < g.nx1; ++i) {
    check_center(rows[i][0], g.x1_center(i), origin, "x1");
    const double rho = rows[i][1];
    if (!(rho >= 0.0)) throw DomainError(origin + ": negative density sample");
    f.rho[i] = rho;
    f.m1[i] = rho * rows[i][2];
    f.m2[i] = rho * rows[i][3];
  }
  return f;
}

void write_meta_json(const std::filesystem::path& path, const RunRecord& record) {
  json j;
  j["schema"] = 1;
  j["law"] = law_to_json(record.law);
  j["data"] = {{"rho_l", record.data.rho_l},
               {"u1_l", record.data.u1_l},
               {"rho_r", record.data.rho_r},
               {"u1_r", record.data.u1_r}};
  j["grid"] = {{"a", record.grid.a}, {"nx1", record.grid.nx1}, {"nx2", record.grid.nx2}};
  j["sim"] = {{"cfl", record.cfl},
              {"t_end", record.t_end},
              {"snapshot_every", record.snapshot_every}};
  j["perturbation"] = {{"component", component_name(record.perturbation.component)},
                       {"amplitude", record.perturbation.amplitude},
                       {"mode", record.perturbation.mode},
                       {"phase", record.perturbation.phase}};
  if (record.seeded)
    j["seed"] = record.seed;
  else
    j["seed"] = nullptr;
  json snaps = json::array();
  for (std::size_t k = 0; k < record.snapshot_times.size(); ++k)
    snaps.push_back({{"index", k},
                     {"t", record.snapshot_times[k]},
                     {"file", record.snapshot_files[k]}});
  j["snapshots"] = snaps;
  j["dt_history"] = record.dt_history;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunRecord read_meta_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  const std::string origin = path.string();
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  try {
    RunRecord rec;
    if (j.at("schema").get<int>() != 1) throw ConfigError(origin + ": unsupported schema");
    rec.law = law_from_json(j.at("law"), origin);
    const json& d = j.at("data");
    rec.data.rho_l = d.at("rho_l").get<double>();
    rec.data.u1_l = d.at("u1_l").get<double>();
    rec.data.rho_r = d.at("rho_r").get<double>();
    rec.data.u1_r = d.at("u1_r").get<double>();
    const json& g = j.at("grid");
    rec.grid = Grid{g.at("a").get<double>(), g.at("nx1").get<int>(), g.at("nx2").get<int>()};
    const json& s = j.at("sim");
    rec.cfl = s.at("cfl").get<double>();
    rec.t_end = s.at("t_end").get<double>();
    rec.snapshot_every = s.at("snapshot_every").get<double>();
    const json& p = j.at("perturbation");
    rec.perturbation.component = component_from_name(p.at("component").get<std::string>(), origin);
    rec.perturbation.amplitude = p.at("amplitude").get<double>();
    rec.perturbation.mode = p.at("mode").get<int>();
    rec.perturbation.phase = p.value("phase", 0.0);
    if (!j.at("seed").is_null()) {
      rec.seeded = true;
      rec.seed = j.at("seed").get<unsigned long long>();
    }
    for (const json& snap : j.at("snapshots")) {
      rec.snapshot_times.push_back(snap.at("t").get<double>());
      rec.snapshot_files.push_back(snap.at("file").get<std::string>());
    }
    rec.dt_history = j.value("dt_history", std::vector<double>{});
    return rec;
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

void write_certificate_csv(const std::filesystem::path& path, const CertificateReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "t,total_relative_entropy,rei2_rhs,energy_slack,one_sided_min_eig\n";
  for (std::size_t k = 0; k < report.times.size(); ++k)
    out << format_double(report.times[k]) << ','
        << format_double(report.total_relative_entropy[k]) << ','
        << format_double(report.rei2_rhs[k]) << ',' << format_double(report.energy_slack[k])
        << ',' << format_double(report.one_sided_min_eig[k]) << '\n';
  if (!out) throw ConfigError("failed while writing " + path.string());
}

void write_verdict_json(const std::filesystem::path& path, const CertificateReport& report,
                        const CertificateOptions& opts) {
  // Matches the pairs the verdict's decay check covers: positive-time
  // snapshots only.
  double max_increase = 0.0;
  for (std::size_t k = 1; k < report.total_relative_entropy.size(); ++k)
    if (report.times[k - 1] > 0.0)
      max_increase = std::max(max_increase, report.total_relative_entropy[k] -
                                                report.total_relative_entropy[k - 1]);
  double max_slack = 0.0;
  for (double s : report.energy_slack) max_slack = std::max(max_slack, s);
  int max_vacuum = 0;
  for (int v : report.vacuum_cells) max_vacuum = std::max(max_vacuum, v);

  json j;
  j["uniqueness_certified"] = report.verdict;
  j["entropy_nonincreasing"] = report.entropy_nonincreasing;
  j["energy_admissible"] = report.energy_admissible;
  j["snapshots"] = report.times.size();
  j["final_relative_entropy"] =
      report.total_relative_entropy.empty() ? 0.0 : report.total_relative_entropy.back();
  j["max_entropy_increase"] = max_increase;
  j["max_energy_slack"] = max_slack;
  j["max_vacuum_cells"] = max_vacuum;
  j["tolerances"] = {{"tol_rei", report.tol_rei},
                     {"tol_energy", report.tol_energy},
                     {"tol_rei_coeff", opts.tol_rei_coeff},
                     {"tol_energy_per_time", opts.tol_energy_per_time}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace rarefan
