#ifndef RAREFAN_FVM_HPP
#define RAREFAN_FVM_HPP

#include <functional>
#include <vector>

#include "rarefan/field.hpp"
#include "rarefan/pressure_law.hpp"
#include "rarefan/riemann.hpp"

namespace rarefan {

enum class Axis { X1, X2 };

struct Flux3 {
  double rho = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

// Rusanov (local Lax-Friedrichs) flux along the given axis:
// F = (f(left) + f(right)) / 2 - s (U_right - U_left) / 2 with s the larger
// |u_axis| + c of the two states. Consistent: equal states give the exact flux.
Flux3 numerical_flux(const State& left, const State& right, const PressureLaw& law,
                     Axis axis);

enum class PerturbComponent { None, Rho, M1, M2 };

// Additive initial perturbation amplitude * sin(2 pi mode x2 + phase) on one
// conserved component, applied in every cell.
struct Perturbation {
  double amplitude = 0.0;
  int mode = 0;
  PerturbComponent component = PerturbComponent::None;
  double phase = 0.0;
};

struct SimConfig {
  Grid grid;
  PressureLaw law;
  RiemannData data;
  double cfl = 0.45;
  double t_end = 1.0;
  double snapshot_every = 0.1;
  Perturbation perturbation{};
};

// In-memory snapshot limit for run_collect; larger runs must stream.
inline constexpr int kSnapshotCap = 64;

// Throws ConfigError unless: even nx1 >= 4 (x1 = 0 on a face), positive
// densities, cfl in (0,1), positive t_end and cadence, waves contained in
// (-a,a) through t_end, and any perturbation well-formed.
void validate_config(const SimConfig& config);

// Piecewise-constant Riemann data plus the optional perturbation, at t = 0.
FieldState init(const SimConfig& config);

// Largest stable time step: cfl * min(h1,h2) / max(|u| + c) over all cells.
double stable_dt(const FieldState& field, const SimConfig& config);

// One conservative explicit Euler update with the prescribed step. Ghost
// cells in x1 are frozen at the exterior states; x2 wraps periodically.
// Throws CflViolation for a nonpositive or nonfinite step and
// NegativeDensity if the update drives a cell density below zero.
FieldState step_with_dt(const FieldState& field, const SimConfig& config, double dt);

// One update at the stable step size.
FieldState step(const FieldState& field, const SimConfig& config);

// Advance to t_end, invoking the sink at t = 0, every snapshot_every, and
// t_end. Asserts boundary-column inactivity after every step. on_step, when
// set, receives every accepted dt in order.
using SnapshotSink = std::function<void(const FieldState&)>;
using StepSink = std::function<void(double)>;
void run(const SimConfig& config, const SnapshotSink& sink, const StepSink& on_step = {});

// run() into a vector; throws ConfigError if the cadence would exceed
// kSnapshotCap snapshots.
std::vector<FieldState> run_collect(const SimConfig& config);

}  // namespace rarefan

#endif
