#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rarefan/entropy.hpp"
#include "rarefan/errors.hpp"
#include "rarefan/fvm.hpp"
#include "rarefan/io.hpp"
#include "rarefan/riemann.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rarefan;

namespace {

// Exit code contract, shared by every subcommand:
//   0 success (certify: verdict true)
//   2 config or usage error
//   3 runtime failure (solver, quadrature, filesystem)
//   4 data outside the two-rarefaction regime where the fan is required
//   5 certify input incomplete (missing meta.json or snapshot files)
//   6 certify ran to completion and the verdict is false
struct ExitWith {
  int code;
  std::string message;
};

struct Invocation {
  fs::path config;
  fs::path out = "out";
  fs::path sweep;
  bool seeded = false;
  unsigned long long seed = 0;
  int threads = 1;
  bool t_set = false;
  double t = 0.0;
  bool samples_set = false;
  int samples = 0;
  fs::path trajectory;
  bool exact_mode = false;
};

RunConfig load_config(const fs::path& path) {
  try {
    return load_run_config(path);
  } catch (const ConfigError& e) {
    throw ExitWith{2, e.what()};
  } catch (const DomainError& e) {
    throw ExitWith{2, e.what()};
  }
}

void need_data(const RunConfig& cfg, const Invocation& inv) {
  if (!cfg.has_data) throw ExitWith{2, inv.config.string() + ": a [data] section is required"};
}

void need_grid(const RunConfig& cfg, const Invocation& inv) {
  if (!cfg.has_grid) throw ExitWith{2, inv.config.string() + ": a [grid] section is required"};
}

void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ExitWith{3, "cannot create output directory " + dir.string()};
}

double phase_from_seed(unsigned long long seed) {
  std::mt19937_64 rng(seed);
  return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
}

void emit(const json& report, bool quiet) {
  if (!quiet) std::cout << report.dump(2) << '\n';
}

// Reports also land in --out as files so sweep entries stay auditable.
void deliver(const json& report, const fs::path& out, const char* name, bool quiet) {
  make_output_dir(out);
  std::ofstream file(out / name);
  if (!file) throw ExitWith{3, "cannot write " + (out / name).string()};
  file << report.dump(2) << '\n';
  emit(report, quiet);
}

int cmd_validate_eos(const Invocation& inv, bool quiet) {
  const RunConfig cfg = load_config(inv.config);
  const ValidationResult v = cfg.sim.law.validate();
  json j;
  j["ok"] = v.ok();
  j["defect"] = to_string(v.defect);
  if (!v.ok()) j["rho"] = v.rho;
  j["message"] = v.message;
  j["vacuum_integral_finite"] = v.vacuum_integral_finite;
  j["min_density"] = cfg.sim.law.min_density();
  deliver(j, inv.out, "eos.json", quiet);
  return v.ok() ? 0 : 2;
}

int cmd_classify(const Invocation& inv, bool quiet) {
  const RunConfig cfg = load_config(inv.config);
  need_data(cfg, inv);
  ClassifyDeltas d;
  const Regime regime = classify(cfg.sim.data, cfg.sim.law, &d);
  if (!std::isfinite(d.v)) {
    // Classification may resolve without the vacuum threshold; fill it in
    // for the report when the law admits it.
    try {
      d.v = cfg.sim.law.invariant_integral(0.0, cfg.sim.data.rho_l) +
            cfg.sim.law.invariant_integral(0.0, cfg.sim.data.rho_r);
    } catch (const VacuumIntegralUndefined&) {
    }
  }
  json deltas;
  deltas["du"] = d.du;
  deltas["I_LR"] = d.i_lr;
  deltas["V"] = std::isfinite(d.v) ? json(d.v) : json(nullptr);
  deltas["S"] = d.s;
  json j;
  j["regime"] = to_string(regime);
  j["deltas"] = deltas;
  if (regime == Regime::RarefactionsOnly) {
    const WaveFan fan(cfg.sim.data, cfg.sim.law);
    j["middle_state"] = {{"rho", fan.middle().rho}, {"u1", fan.middle().u1}};
    j["fan_speeds"] = {{"xi_1l", fan.speeds().xi_1l},
                       {"xi_1c", fan.speeds().xi_1c},
                       {"xi_2c", fan.speeds().xi_2c},
                       {"xi_2r", fan.speeds().xi_2r}};
  }
  deliver(j, inv.out, "classify.json", quiet);
  return 0;
}

int cmd_exact(const Invocation& inv, bool quiet) {
  const RunConfig cfg = load_config(inv.config);
  need_data(cfg, inv);
  need_grid(cfg, inv);
  const double t = inv.t_set ? inv.t : cfg.exact_t;
  const int samples = inv.samples_set ? inv.samples : cfg.exact_samples;
  if (!(t > 0.0)) throw ExitWith{2, "sampling time must be positive"};
  if (samples < 1) throw ExitWith{2, "sample count must be positive"};
  const WaveFan fan(cfg.sim.data, cfg.sim.law);
  make_output_dir(inv.out);
  const fs::path file = inv.out / "exact.csv";
  write_exact_csv(file, fan, t, cfg.sim.grid.a, samples);
  json j;
  j["file"] = file.string();
  j["t"] = t;
  j["samples"] = samples;
  j["middle_state"] = {{"rho", fan.middle().rho}, {"u1", fan.middle().u1}};
  emit(j, quiet);
  return 0;
}

int cmd_simulate(const Invocation& inv, bool quiet) {
  RunConfig cfg = load_config(inv.config);
  need_data(cfg, inv);
  need_grid(cfg, inv);
  if (inv.seeded && cfg.sim.perturbation.component != PerturbComponent::None)
    cfg.sim.perturbation.phase = phase_from_seed(inv.seed);
  try {
    validate_config(cfg.sim);
  } catch (const ConfigError& e) {
    throw ExitWith{2, e.what()};
  }
  make_output_dir(inv.out / "snapshots");

  RunRecord rec;
  rec.law = cfg.law_spec;
  rec.data = cfg.sim.data;
  rec.grid = cfg.sim.grid;
  rec.cfl = cfg.sim.cfl;
  rec.t_end = cfg.sim.t_end;
  rec.snapshot_every = cfg.sim.snapshot_every;
  rec.perturbation = cfg.sim.perturbation;
  rec.seeded = inv.seeded;
  rec.seed = inv.seed;

  try {
    int index = 0;
    run(
        cfg.sim,
        [&](const FieldState& f) {
          const std::string name = "t_" + std::to_string(index) + ".csv";
          write_field_csv(inv.out / "snapshots" / name, f);
          rec.snapshot_times.push_back(f.t);
          rec.snapshot_files.push_back("snapshots/" + name);
          ++index;
        },
        [&](double dt) { rec.dt_history.push_back(dt); });
  } catch (const std::exception& e) {
    throw ExitWith{3, e.what()};
  }
  write_meta_json(inv.out / "meta.json", rec);

  json j;
  j["out"] = inv.out.string();
  j["snapshots"] = rec.snapshot_times.size();
  j["steps"] = rec.dt_history.size();
  j["t_end"] = rec.t_end;
  emit(j, quiet);
  return 0;
}

// Times certify evaluates the sampled exact solution at: every cadence
// point from the first onward, then t_end. t = 0 is excluded because the
// self-similar solution is defined for t > 0 only.
std::vector<double> exact_sample_times(double t_end, double every) {
  std::vector<double> times;
  const double tiny = 1e-12 * std::max(1.0, t_end);
  for (double t = every; t < t_end - tiny; t += every) times.push_back(t);
  times.push_back(t_end);
  return times;
}

int cmd_certify(const Invocation& inv, bool quiet) {
  const RunConfig cfg = load_config(inv.config);
  CertificateOptions opts = cfg.certify;

  std::optional<WaveFan> fan;
  std::vector<FieldState> traj;
  double dt = 0.0;

  if (inv.exact_mode) {
    need_data(cfg, inv);
    need_grid(cfg, inv);
    fan.emplace(cfg.sim.data, cfg.sim.law);
    const std::vector<double> times = exact_sample_times(cfg.sim.t_end, cfg.sim.snapshot_every);
    if (times.size() > static_cast<std::size_t>(kSnapshotCap))
      throw ExitWith{2, "snapshot cadence exceeds the in-memory cap; increase snapshot_every"};
    for (double t : times) traj.push_back(fan->evaluate_field(t, cfg.sim.grid));
    dt = times.size() > 1 ? times[1] - times[0] : times[0];
    // The energy budget of a sampled (rather than simulated) trajectory
    // carries cell-quadrature error of the smooth exact solution, not
    // scheme dissipation; widen its tolerance unless the config pins it.
    if (!cfg.certify_energy_overridden) opts.tol_energy_per_time = 1e-2;
  } else {
    const fs::path source = inv.trajectory.empty() ? inv.out : inv.trajectory;
    if (fs::is_regular_file(source)) {
      need_data(cfg, inv);
      need_grid(cfg, inv);
      fan.emplace(cfg.sim.data, cfg.sim.law);
      traj.push_back(read_exact_csv(source, cfg.sim.grid.a, cfg.exact_t));
      dt = cfg.sim.snapshot_every;
    } else {
      const fs::path meta_path = source / "meta.json";
      if (!fs::exists(meta_path))
        throw ExitWith{5, "no trajectory at " + source.string() + " (meta.json not found)"};
      const RunRecord rec = read_meta_json(meta_path);
      if (rec.snapshot_files.empty())
        throw ExitWith{5, meta_path.string() + ": trajectory lists no snapshots"};
      fan.emplace(rec.data, make_law(rec.law));
      for (std::size_t k = 0; k < rec.snapshot_files.size(); ++k) {
        const fs::path snap = source / rec.snapshot_files[k];
        if (!fs::exists(snap)) throw ExitWith{5, "missing snapshot " + snap.string()};
        traj.push_back(read_field_csv(snap, rec.grid, rec.snapshot_times[k]));
      }
      if (!rec.dt_history.empty()) {
        dt = *std::max_element(rec.dt_history.begin(), rec.dt_history.end());
      } else {
        dt = rec.snapshot_every;
      }
    }
  }

  const CertificateReport report = make_certificate(traj, *fan, dt, opts);
  make_output_dir(inv.out);
  write_certificate_csv(inv.out / "certificate.csv", report);
  write_verdict_json(inv.out / "verdict.json", report, opts);
  json j;
  j["uniqueness_certified"] = report.verdict;
  j["entropy_nonincreasing"] = report.entropy_nonincreasing;
  j["energy_admissible"] = report.energy_admissible;
  j["certificate"] = (inv.out / "certificate.csv").string();
  j["verdict"] = (inv.out / "verdict.json").string();
  emit(j, quiet);
  return report.verdict ? 0 : 6;
}

using Handler = int (*)(const Invocation&, bool);

int guarded(const Handler handler, const Invocation& inv, bool quiet) {
  try {
    return handler(inv, quiet);
  } catch (const ExitWith& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const WrongRegime& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

// Runs the subcommand once per config listed in the manifest, each into its
// own subdirectory of --out. Entries are independent; --threads parallelizes
// across them only, so results are identical at any thread count.
int run_sweep(const Handler handler, const Invocation& inv) {
  std::vector<fs::path> entries;
  {
    std::ifstream in(inv.sweep);
    if (!in) {
      std::fprintf(stderr, "error: cannot open sweep manifest %s\n", inv.sweep.string().c_str());
      return 2;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] == '#') continue;
      const auto e = line.find_last_not_of(" \t");
      fs::path p = line.substr(b, e - b + 1);
      if (p.is_relative()) p = inv.sweep.parent_path() / p;
      entries.push_back(p.lexically_normal());
    }
  }
  if (entries.empty()) {
    std::fprintf(stderr, "error: sweep manifest lists no configs\n");
    return 2;
  }

  std::vector<Invocation> jobs;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Invocation job = inv;
    job.sweep.clear();
    job.config = entries[k];
    std::string stem = entries[k].stem().string();
    if (std::find(labels.begin(), labels.end(), stem) != labels.end())
      stem += "_" + std::to_string(k);
    labels.push_back(stem);
    job.out = inv.out / stem;
    if (inv.seeded) job.seed = inv.seed + k;
    jobs.push_back(std::move(job));
  }

  std::vector<int> codes(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(inv.threads, static_cast<int>(jobs.size())));
  auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < jobs.size(); k = next.fetch_add(1))
      codes[k] = guarded(handler, jobs[k], /*quiet=*/true);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  int worst = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    std::printf("%s: exit %d (out: %s)\n", jobs[k].config.string().c_str(), codes[k],
                jobs[k].out.string().c_str());
    worst = std::max(worst, codes[k]);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact two-rarefaction solutions of the barotropic Euler Riemann problem,\n"
      "their finite-volume approximations, and relative-entropy uniqueness\n"
      "certificates."};
  app.require_subcommand(1);
  app.fallthrough();

  Invocation inv;
  app.add_option("--config", inv.config, "benchmark config file (TOML, schema = 1)");
  app.add_option("--out", inv.out, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", inv.seed, "derive the perturbation phase from this seed");
  app.add_option("--threads", inv.threads, "worker threads across --sweep entries")
      ->check(CLI::PositiveNumber);
  app.add_option("--sweep", inv.sweep,
                 "manifest with one config path per line; runs the subcommand per entry");

  app.add_subcommand("validate-eos", "check the pressure law's structural conditions");
  app.add_subcommand("classify", "report the wave regime of the Riemann data");
  auto* exact_cmd = app.add_subcommand("exact", "sample the exact two-rarefaction solution");
  auto* t_opt = exact_cmd->add_option("--t", inv.t, "sampling time (overrides [exact] t)");
  auto* samples_opt =
      exact_cmd->add_option("--samples", inv.samples, "sample count (overrides [exact] samples)");
  app.add_subcommand("simulate", "run the finite-volume scheme and write snapshots");
  auto* certify_cmd =
      app.add_subcommand("certify", "evaluate the relative-entropy certificate of a trajectory");
  certify_cmd->add_option("--trajectory", inv.trajectory,
                          "simulate output directory or exact-sample CSV (default: --out)");
  certify_cmd->add_flag("--exact", inv.exact_mode, "self-certify the sampled exact solution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  inv.seeded = seed_opt->count() > 0;
  inv.t_set = t_opt->count() > 0;
  inv.samples_set = samples_opt->count() > 0;

  Handler handler = nullptr;
  if (app.got_subcommand("validate-eos")) handler = cmd_validate_eos;
  if (app.got_subcommand("classify")) handler = cmd_classify;
  if (app.got_subcommand("exact")) handler = cmd_exact;
  if (app.got_subcommand("simulate")) handler = cmd_simulate;
  if (app.got_subcommand("certify")) handler = cmd_certify;

  if (!inv.sweep.empty()) {
    if (!inv.config.empty()) {
      std::fprintf(stderr, "error: --sweep and --config are mutually exclusive\n");
      return 2;
    }
    return run_sweep(handler, inv);
  }
  if (inv.config.empty()) {
    std::fprintf(stderr, "error: --config is required (or --sweep with a manifest)\n");
    return 2;
  }
  return guarded(handler, inv, /*quiet=*/false);
}
