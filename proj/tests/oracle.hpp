// Reference implementations used only by tests. Everything here is computed
// from the defining integrals by tanh-sinh quadrature and bisection, with no
// calls into the library, so agreement is evidence rather than tautology.
// Valid for gamma-law exponents gamma >= 1.1 (endpoint truncation bound).
#ifndef RAREFAN_TESTS_ORACLE_HPP
#define RAREFAN_TESTS_ORACLE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace oracle {

// Integrate f over (a, b), a < b. Double-exponential nodes tolerate an
// integrable blow-up of f at either endpoint; f is never called at a or b
// when the transformed node rounds onto them.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const double half_pi = 1.5707963267948966;
  const double c = 0.5 * (b - a);
  auto term = [&](double t) {
    const double u = half_pi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    const double d = 2.0 * e / (1.0 + e);  // 1 - |tanh(u)|, no cancellation
    const double x = (u < 0.0) ? a + c * d : b - c * d;
    if (!(x > a) || !(x < b)) return 0.0;
    const double ch = std::cosh(u);
    const double w = half_pi * std::cosh(t) / (ch * ch);
    const double v = c * w * f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  const double t_max = 6.0;
  double h = 1.0;
  double sum = term(0.0);
  for (int k = 1; k * h <= t_max; ++k) sum += term(k * h) + term(-k * h);
  double integral = h * sum;
  for (int level = 1; level <= 10; ++level) {
    h *= 0.5;
    for (int k = 1; k * h <= t_max; k += 2) sum += term(k * h) + term(-k * h);
    const double refined = h * sum;
    if (level >= 3 && std::abs(refined - integral) <= tol * std::max(1.0, std::abs(refined)))
      return refined;
    integral = refined;
  }
  return integral;
}

struct GammaLaw {
  double kappa, gamma;
  double p(double rho) const { return kappa * std::pow(rho, gamma); }
  double dp(double rho) const { return kappa * gamma * std::pow(rho, gamma - 1.0); }
};

// phi(rho) = int_0^rho sqrt(p'(tau))/tau dtau, the vacuum-anchored invariant.
inline double phi(const GammaLaw& law, double rho) {
  if (rho <= 0.0) return 0.0;
  return tanh_sinh([&](double tau) { return std::sqrt(law.dp(tau)) / tau; }, 0.0, rho);
}

// Signed integral between positive endpoints.
inline double invariant(const GammaLaw& law, double a, double b) {
  if (a == b) return 0.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double sign = b > a ? 1.0 : -1.0;
  return sign * tanh_sinh([&](double tau) { return std::sqrt(law.dp(tau)) / tau; }, lo, hi);
}

enum class Regime { TwoShocks, MixedShockRarefaction, RarefactionsOnly, VacuumPresent };

struct RiemannCase {
  double rho_l, u1_l, rho_r, u1_r;
};

struct Classified {
  Regime regime;
  double du, i_lr, v, s;
};

inline Classified classify(const GammaLaw& law, const RiemannCase& c) {
  Classified out{};
  out.du = c.u1_r - c.u1_l;
  out.i_lr = std::abs(invariant(law, c.rho_l, c.rho_r));
  out.v = phi(law, c.rho_l) + phi(law, c.rho_r);
  out.s = std::sqrt((c.rho_l - c.rho_r) * (law.p(c.rho_l) - law.p(c.rho_r)) /
                    (c.rho_l * c.rho_r));
  if (out.du < -out.s)
    out.regime = Regime::TwoShocks;
  else if (out.du < out.i_lr)
    out.regime = Regime::MixedShockRarefaction;
  else if (out.du < out.v)
    out.regime = Regime::RarefactionsOnly;
  else
    out.regime = Regime::VacuumPresent;
  return out;
}

struct MiddleState {
  double rho, u1;
};

// Bisection on V - 2 phi(rho) = du, decreasing in rho; valid when
// I_LR <= du < V (both waves rarefactions, no vacuum).
inline MiddleState middle_state(const GammaLaw& law, const RiemannCase& c) {
  const Classified cls = classify(law, c);
  double lo = 0.0, hi = std::max(c.rho_l, c.rho_r);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double g = cls.v - 2.0 * phi(law, mid) - cls.du;
    (g > 0.0 ? lo : hi) = mid;
  }
  MiddleState m;
  m.rho = 0.5 * (lo + hi);
  m.u1 = 0.5 * (c.u1_l + invariant(law, m.rho, c.rho_l) + c.u1_r -
                invariant(law, m.rho, c.rho_r));
  return m;
}

// Central difference with one Richardson extrapolation step, O(h^4).
inline double richardson_d1(const std::function<double(double)>& f, double x, double h) {
  auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  const double d_h = central(h), d_h2 = central(0.5 * h);
  return (4.0 * d_h2 - d_h) / 3.0;
}

inline double richardson_d2(const std::function<double(double)>& f, double x, double h) {
  auto central = [&](double step) {
    return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
  };
  const double d_h = central(h), d_h2 = central(0.5 * h);
  return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace oracle

#endif
