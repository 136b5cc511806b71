#include "rarefan/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rarefan {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::TwoShocks: return "TwoShocks";
    case Regime::MixedShockRarefaction: return "MixedShockRarefaction";
    case Regime::RarefactionsOnly: return "RarefactionsOnly";
    case Regime::VacuumPresent: return "VacuumPresent";
  }
  return "RarefactionsOnly";
}

namespace {

// Bisection in log(rho) to relative width 1e-14 followed by two clamped
// Newton steps. Logarithmic bisection keeps the relative error bounded even
// for middle states many orders of magnitude below the data, where a fixed
// absolute width cannot reach the residual tolerance.
template <typename F, typename DF>
double solve_monotone(const F& f, const DF& df, double lo, double hi, const char* what) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw RootFindingFailure(std::string(what) + ": no sign change in bracket");
  double ylo = std::log(lo), yhi = std::log(hi);
  for (int it = 0; it < 220 && yhi - ylo > 1e-14; ++it) {
    const double ym = 0.5 * (ylo + yhi);
    const double fm = f(std::exp(ym));
    if (fm == 0.0) return std::exp(ym);
    if ((fm > 0.0) == (flo > 0.0)) {
      ylo = ym;
      flo = fm;
    } else {
      yhi = ym;
    }
  }
  double x = std::exp(0.5 * (ylo + yhi));
  for (int polish = 0; polish < 2; ++polish) {
    const double fx = f(x);
    const double dfx = df(x);
    if (dfx == 0.0) break;
    const double step = fx / dfx;
    x = std::clamp(x - step, std::exp(ylo), std::exp(yhi));
  }
  return x;
}

void require_positive_densities(const RiemannData& d) {
  if (!(d.rho_l > 0.0) || !(d.rho_r > 0.0))
    throw DomainError("Riemann data requires rho_l > 0 and rho_r > 0");
}

}  // namespace

Regime classify(const RiemannData& data, const PressureLaw& law, ClassifyDeltas* deltas) {
  require_positive_densities(data);
  ClassifyDeltas d;
  d.du = data.u1_r - data.u1_l;
  d.i_lr = std::abs(law.invariant_integral(data.rho_l, data.rho_r));
  if (data.rho_l == data.rho_r) {
    d.s = 0.0;
  } else {
    d.s = std::sqrt((data.rho_l - data.rho_r) *
                    (law.pressure(data.rho_l) - law.pressure(data.rho_r)) /
                    (data.rho_l * data.rho_r));
  }
  Regime regime;
  if (d.du < -d.s) {
    regime = Regime::TwoShocks;
  } else if (d.du < d.i_lr) {
    regime = Regime::MixedShockRarefaction;
  } else {
    // Only now are the vacuum-anchored integrals needed; tabulated laws
    // cannot evaluate them and propagate VacuumIntegralUndefined.
    d.v = law.invariant_integral(0.0, data.rho_l) + law.invariant_integral(0.0, data.rho_r);
    regime = (d.du < d.v) ? Regime::RarefactionsOnly : Regime::VacuumPresent;
  }
  if (deltas && law.is_gamma() && std::isnan(d.v))
    d.v = law.invariant_integral(0.0, data.rho_l) + law.invariant_integral(0.0, data.rho_r);
  if (deltas) *deltas = d;
  return regime;
}

MiddleState solve_middle_state(const RiemannData& data, const PressureLaw& law) {
  const Regime regime = classify(data, law);
  if (regime != Regime::RarefactionsOnly)
    throw WrongRegime(std::string("middle state defined only for RarefactionsOnly, got ") +
                      to_string(regime));
  const double du = data.u1_r - data.u1_l;
  const double hi = std::max(data.rho_l, data.rho_r);
  auto g = [&](double rho) {
    return law.invariant_integral(rho, data.rho_l) + law.invariant_integral(rho, data.rho_r) -
           du;
  };
  auto dg = [&](double rho) { return -2.0 * law.sound_speed(rho) / rho; };
  MiddleState m;
  if (g(hi) == 0.0) {
    m.rho = hi;  // du = I_LR with equal densities: both waves empty
  } else {
    const double lo = std::max(1e-30, law.min_density());
    m.rho = solve_monotone(g, dg, lo, hi, "solve_middle_state");
  }
  m.u1 = 0.5 * (data.u1_l + law.invariant_integral(m.rho, data.rho_l) + data.u1_r -
                law.invariant_integral(m.rho, data.rho_r));
  return m;
}

WaveFan::WaveFan(const RiemannData& data, const PressureLaw& law)
    : data_(data), law_(law), middle_(solve_middle_state(data, law)) {
  speeds_.xi_1l = data_.u1_l - law_.sound_speed(data_.rho_l);
  speeds_.xi_1c = middle_.u1 - law_.sound_speed(middle_.rho);
  speeds_.xi_2c = middle_.u1 + law_.sound_speed(middle_.rho);
  speeds_.xi_2r = data_.u1_r + law_.sound_speed(data_.rho_r);
}

FanPoint WaveFan::evaluate(double xi) const {
  if (xi < speeds_.xi_1l) return {data_.rho_l, data_.u1_l};
  if (xi < speeds_.xi_1c) {
    // u1(rho) = u1_l + I(rho, rho_l) decreasing in rho; xi = u1(rho) - c(rho).
    auto f = [&](double rho) {
      return data_.u1_l + law_.invariant_integral(rho, data_.rho_l) - law_.sound_speed(rho) -
             xi;
    };
    auto df = [&](double rho) {
      const double c = law_.sound_speed(rho);
      return -c / rho - law_.d2pressure(rho) / (2.0 * c);
    };
    const double rho = solve_monotone(f, df, middle_.rho, data_.rho_l, "1-fan evaluate");
    return {rho, data_.u1_l + law_.invariant_integral(rho, data_.rho_l)};
  }
  if (xi <= speeds_.xi_2c) return {middle_.rho, middle_.u1};
  if (xi <= speeds_.xi_2r) {
    // u1(rho) = u1_r - I(rho, rho_r) increasing with xi = u1(rho) + c(rho).
    auto f = [&](double rho) {
      return data_.u1_r - law_.invariant_integral(rho, data_.rho_r) + law_.sound_speed(rho) -
             xi;
    };
    auto df = [&](double rho) {
      const double c = law_.sound_speed(rho);
      return c / rho + law_.d2pressure(rho) / (2.0 * c);
    };
    const double rho = solve_monotone(f, df, middle_.rho, data_.rho_r, "2-fan evaluate");
    return {rho, data_.u1_r - law_.invariant_integral(rho, data_.rho_r)};
  }
  return {data_.rho_r, data_.u1_r};
}

double WaveFan::du1_dxi(double xi) const {
  const bool in_1 = xi > speeds_.xi_1l && xi < speeds_.xi_1c;
  const bool in_2 = xi > speeds_.xi_2c && xi < speeds_.xi_2r;
  if (!in_1 && !in_2) return 0.0;
  const FanPoint pt = evaluate(xi);
  const double c2 = law_.dpressure(pt.rho);
  return 2.0 * c2 / (2.0 * c2 + pt.rho * law_.d2pressure(pt.rho));
}

double WaveFan::drho_dxi(double xi) const {
  const bool in_1 = xi > speeds_.xi_1l && xi < speeds_.xi_1c;
  const bool in_2 = xi > speeds_.xi_2c && xi < speeds_.xi_2r;
  if (!in_1 && !in_2) return 0.0;
  const FanPoint pt = evaluate(xi);
  const double c = law_.sound_speed(pt.rho);
  const double dudxi = 2.0 * c * c / (2.0 * c * c + pt.rho * law_.d2pressure(pt.rho));
  return (in_1 ? -1.0 : 1.0) * pt.rho / c * dudxi;
}

FieldState WaveFan::evaluate_field(double t, const Grid& grid) const {
  if (!(t > 0.0)) throw DomainError("evaluate_field requires t > 0");
  FieldState field = FieldState::zeros(grid, t);
  for (int i = 0; i < grid.nx1; ++i) {
    const FanPoint pt = evaluate(grid.x1_center(i) / t);
    for (int j = 0; j < grid.nx2; ++j) {
      const std::size_t k = grid.index(i, j);
      field.rho[k] = pt.rho;
      field.m1[k] = pt.rho * pt.u1;
      field.m2[k] = 0.0;
    }
  }
  return field;
}

}  // namespace rarefan
