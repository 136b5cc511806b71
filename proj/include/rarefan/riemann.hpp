#ifndef RAREFAN_RIEMANN_HPP
#define RAREFAN_RIEMANN_HPP

#include <limits>

#include "rarefan/errors.hpp"
#include "rarefan/field.hpp"
#include "rarefan/pressure_law.hpp"

namespace rarefan {

// Left/right constant states separated by a jump at x1 = 0; transverse
// velocity is identically zero on both sides.
struct RiemannData {
  double rho_l = 1.0;
  double u1_l = 0.0;
  double rho_r = 1.0;
  double u1_r = 0.0;
};

enum class Regime { TwoShocks, MixedShockRarefaction, RarefactionsOnly, VacuumPresent };

const char* to_string(Regime r);

// The velocity jump du and the three thresholds it is compared against:
// du < -s        -> TwoShocks
// du in [-s, i_lr) -> MixedShockRarefaction
// du in [i_lr, v)  -> RarefactionsOnly
// du >= v          -> VacuumPresent
// v is NaN when classification resolved without evaluating the vacuum
// integrals (tabulated laws cannot reach density 0).
struct ClassifyDeltas {
  double du = 0.0;
  double i_lr = 0.0;
  double v = std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
};

Regime classify(const RiemannData& data, const PressureLaw& law,
                ClassifyDeltas* deltas = nullptr);

struct MiddleState {
  double rho = 0.0;
  double u1 = 0.0;
};

// Unique middle state of the two-rarefaction solution: u1 - u1_l equals the
// invariant integral from rho to rho_l and u1_r - u1 the one from rho to
// rho_r, both residuals below 1e-12. Throws WrongRegime outside
// RarefactionsOnly.
MiddleState solve_middle_state(const RiemannData& data, const PressureLaw& law);

// Ordered self-similar edge speeds; degenerate waves collapse to equal pairs.
struct FanSpeeds {
  double xi_1l = 0.0;
  double xi_1c = 0.0;
  double xi_2c = 0.0;
  double xi_2r = 0.0;
};

struct FanPoint {
  double rho = 0.0;
  double u1 = 0.0;
};

// Exact self-similar solution in the two-rarefaction regime, evaluated as a
// function of xi = x1/t. Immutable after construction; all methods are pure.
class WaveFan {
 public:
  WaveFan(const RiemannData& data, const PressureLaw& law);

  const RiemannData& data() const { return data_; }
  const PressureLaw& law() const { return law_; }
  const MiddleState& middle() const { return middle_; }
  const FanSpeeds& speeds() const { return speeds_; }

  FanPoint evaluate(double xi) const;

  // One-sided values on the fan edges are taken from outside the fan: both
  // derivatives vanish except strictly inside an open fan interval.
  double du1_dxi(double xi) const;
  double drho_dxi(double xi) const;

  // Cell-center sampling at time t > 0, constant in x2, m2 = 0.
  FieldState evaluate_field(double t, const Grid& grid) const;

 private:
  RiemannData data_;
  PressureLaw law_;
  MiddleState middle_;
  FanSpeeds speeds_;
};

inline FanSpeeds fan_speeds(const WaveFan& fan) { return fan.speeds(); }

}  // namespace rarefan

#endif
