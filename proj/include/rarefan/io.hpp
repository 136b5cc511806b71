#ifndef RAREFAN_IO_HPP
#define RAREFAN_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "rarefan/entropy.hpp"
#include "rarefan/errors.hpp"
#include "rarefan/field.hpp"
#include "rarefan/fvm.hpp"
#include "rarefan/riemann.hpp"

namespace rarefan {

// Flat TOML subset: bare keys before the first [section], one key = value
// per line, values limited to quoted strings, booleans, integers, and
// floats, # comments. Arrays, nested tables, and multiline strings are
// rejected with ConfigError.
using TomlValue = std::variant<bool, long long, double, std::string>;

struct TomlDoc {
  // Keyed "section.key"; bare top-level keys appear unprefixed.
  std::map<std::string, TomlValue> values;
};

TomlDoc parse_toml(const std::string& text, const std::string& origin);

// How the pressure law was specified, kept alongside the constructed law so
// reports and run metadata can reproduce it.
struct LawSpec {
  std::string kind;  // "gamma" or "table"
  double kappa = 0.0;
  double gamma = 0.0;
  std::filesystem::path table;  // resolved path for kind == "table"
};

PressureLaw make_law(const LawSpec& spec);

// Parsed benchmark config. Only [law] is mandatory; the presence of [data]
// and [grid] is tracked so each subcommand can demand exactly the sections
// it needs.
struct RunConfig {
  LawSpec law_spec;
  SimConfig sim;
  bool has_data = false;
  bool has_grid = false;
  double exact_t = 1.0;
  int exact_samples = 201;
  CertificateOptions certify{};
  bool certify_rei_overridden = false;
  bool certify_energy_overridden = false;
};

// Loads and validates a schema = 1 config file. Table paths resolve
// relative to the config file's directory. Unknown keys are errors.
RunConfig load_run_config(const std::filesystem::path& path);

// Two-column density,pressure CSV with one header row.
PressureLaw read_pressure_table_csv(const std::filesystem::path& path);

std::string format_double(double v);  // %.17g, the round-trip format

// Snapshot CSV with header x1,x2,rho,m1,m2; rows sweep j outer, i inner.
void write_field_csv(const std::filesystem::path& path, const FieldState& field);
// Rereads a snapshot, checking the header, the row count, and that the
// stored coordinates match the grid's cell centers (GridMismatch if not).
FieldState read_field_csv(const std::filesystem::path& path, const Grid& grid, double t);

// Exact-fan CSV with header x1,rho,u1,u2 at the cell centers of the
// samples-cell grid on (-a,a); u2 is identically zero.
void write_exact_csv(const std::filesystem::path& path, const WaveFan& fan, double t,
                     double a, int samples);
// Rebuilds the sampled solution as a single-row field at time t.
FieldState read_exact_csv(const std::filesystem::path& path, double a, double t);

// Everything needed to re-derive a finished run: inputs, snapshot index,
// and the accepted step sizes.
struct RunRecord {
  LawSpec law;
  RiemannData data;
  Grid grid{1.0, 4, 1};
  double cfl = 0.45;
  double t_end = 1.0;
  double snapshot_every = 0.1;
  Perturbation perturbation{};
  bool seeded = false;
  unsigned long long seed = 0;
  std::vector<double> snapshot_times;
  std::vector<std::string> snapshot_files;  // relative to the run directory
  std::vector<double> dt_history;
};

void write_meta_json(const std::filesystem::path& path, const RunRecord& record);
RunRecord read_meta_json(const std::filesystem::path& path);

void write_certificate_csv(const std::filesystem::path& path, const CertificateReport& report);
// Verdict JSON with the flags, the applied tolerances, and the extreme
// values they were compared against.
void write_verdict_json(const std::filesystem::path& path, const CertificateReport& report,
                        const CertificateOptions& opts);

}  // namespace rarefan

#endif
