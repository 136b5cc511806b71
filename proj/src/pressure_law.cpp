#include "rarefan/pressure_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rarefan {

const char* to_string(LawDefect d) {
  switch (d) {
    case LawDefect::None: return "None";
    case LawDefect::NonzeroAtVacuum: return "NonzeroAtVacuum";
    case LawDefect::NonMonotone: return "NonMonotone";
    case LawDefect::NonConvex: return "NonConvex";
  }
  return "None";
}

namespace quadrature {

namespace {
struct SimpsonPanel {
  double fa, fm, fb;
  double estimate(double a, double b) const { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }
};

double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                       const SimpsonPanel& panel, double whole, double tol, int depth,
                       int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  SimpsonPanel left{panel.fa, f(lm), panel.fm};
  SimpsonPanel right{panel.fm, f(rm), panel.fb};
  const double sl = left.estimate(a, m);
  const double sr = right.estimate(m, b);
  const double delta = sl + sr - whole;
  if (std::abs(delta) <= 15.0 * tol)
    return sl + sr + delta / 15.0;
  if (depth >= max_depth)
    throw QuadratureFailure("adaptive Simpson exceeded max subdivisions");
  return simpson_recurse(f, a, m, left, sl, 0.5 * tol, depth + 1, max_depth) +
         simpson_recurse(f, m, b, right, sr, 0.5 * tol, depth + 1, max_depth);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  SimpsonPanel panel{f(a), f(m), f(b)};
  const double whole = panel.estimate(a, b);
  return simpson_recurse(f, a, b, panel, whole, tol, 0, max_depth);
}

}  // namespace quadrature

namespace {

// Fritsch-Carlson slopes: monotone on monotone data, shape-preserving at the ends.
std::vector<double> hermite_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), d(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // One-sided three-point endpoint slopes, clipped to preserve shape.
  auto endpoint = [](double ha, double hb, double da, double db) {
    double d0 = ((2.0 * ha + hb) * da - ha * db) / (ha + hb);
    if (d0 * da <= 0.0) d0 = 0.0;
    else if (da * db <= 0.0 && std::abs(d0) > 3.0 * std::abs(da)) d0 = 3.0 * da;
    return d0;
  };
  d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

struct CubicPiece {
  double t, h, y0, y1, d0, d1;  // local coordinate s = (x - t)/h in [0,1]
  double value(double x) const {
    const double s = (x - t) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
  }
  double deriv(double x) const {
    const double s = (x - t) / h;
    const double g00 = 6.0 * s * (s - 1.0);
    const double g10 = (1.0 - s) * (1.0 - 3.0 * s);
    const double g01 = -g00;
    const double g11 = s * (3.0 * s - 2.0);
    return (g00 * y0 + g01 * y1) / h + g10 * d0 + g11 * d1;
  }
  double second(double x) const {
    const double s = (x - t) / h;
    const double k00 = (12.0 * s - 6.0) / (h * h);
    const double k10 = (6.0 * s - 4.0) / h;
    const double k11 = (6.0 * s - 2.0) / h;
    return k00 * (y0 - y1) + k10 * d0 + k11 * d1;
  }
};

CubicPiece piece_at(const TabulatedLaw& tab, double x) {
  const auto& r = tab.rho;
  if (x < r.front() || x > r.back())
    throw DomainError("tabulated pressure law queried outside its density range");
  auto it = std::upper_bound(r.begin(), r.end(), x);
  std::size_t i = (it == r.begin()) ? 0 : static_cast<std::size_t>(it - r.begin()) - 1;
  if (i + 1 >= r.size()) i = r.size() - 2;
  return CubicPiece{r[i], r[i + 1] - r[i], tab.p[i], tab.p[i + 1], tab.slope[i], tab.slope[i + 1]};
}

}  // namespace

PressureLaw PressureLaw::gamma_law(double kappa, double gamma) {
  if (!(kappa > 0.0)) throw DomainError("gamma law requires kappa > 0");
  if (!(gamma > 1.0)) throw DomainError("gamma law requires gamma > 1");
  PressureLaw law;
  law.law_ = GammaLaw{kappa, gamma};
  return law;
}

PressureLaw PressureLaw::tabulated(std::vector<double> rho, std::vector<double> p) {
  if (rho.size() != p.size()) throw DomainError("tabulated law: rho/p size mismatch");
  if (rho.size() < 3) throw DomainError("tabulated law requires at least 3 samples");
  if (rho.front() < 0.0) throw DomainError("tabulated law: negative density sample");
  for (std::size_t i = 1; i < rho.size(); ++i)
    if (!(rho[i] > rho[i - 1])) throw DomainError("tabulated law: rho samples must strictly increase");
  TabulatedLaw tab;
  tab.slope = hermite_slopes(rho, p);
  tab.rho = std::move(rho);
  tab.p = std::move(p);
  PressureLaw law;
  law.law_ = std::move(tab);
  return law;
}

double PressureLaw::min_density() const {
  if (auto* t = as_tabulated()) return t->rho.front();
  return 0.0;
}

double PressureLaw::pressure(double rho) const {
  if (rho < 0.0) throw DomainError("pressure: rho < 0");
  if (auto* g = as_gamma()) return g->kappa * std::pow(rho, g->gamma);
  return piece_at(*as_tabulated(), rho).value(rho);
}

double PressureLaw::dpressure(double rho) const {
  if (rho < 0.0) throw DomainError("dpressure: rho < 0");
  if (auto* g = as_gamma()) return g->kappa * g->gamma * std::pow(rho, g->gamma - 1.0);
  return piece_at(*as_tabulated(), rho).deriv(rho);
}

double PressureLaw::d2pressure(double rho) const {
  if (rho < 0.0) throw DomainError("d2pressure: rho < 0");
  if (auto* g = as_gamma())
    return g->kappa * g->gamma * (g->gamma - 1.0) * std::pow(rho, g->gamma - 2.0);
  return piece_at(*as_tabulated(), rho).second(rho);
}

double PressureLaw::pressure_potential(double rho) const {
  if (rho < 0.0) throw DomainError("pressure_potential: rho < 0");
  if (auto* g = as_gamma()) {
    // rho * int_1^rho kappa z^(gamma-2) dz = kappa (rho^gamma - rho)/(gamma-1)
    return g->kappa * (std::pow(rho, g->gamma) - rho) / (g->gamma - 1.0);
  }
  if (rho == 0.0) return 0.0;
  const double integral = quadrature::adaptive_simpson(
      [this](double z) { return pressure(z) / (z * z); }, 1.0, rho, kTolQuad, kMaxQuadDepth);
  return rho * integral;
}

double PressureLaw::dpressure_potential(double rho) const {
  if (!(rho > 0.0)) throw DomainError("dpressure_potential: rho <= 0");
  return pressure_potential(rho) / rho + pressure(rho) / rho;
}

double PressureLaw::sound_speed(double rho) const {
  if (!(rho > 0.0)) throw DomainError("sound_speed: rho <= 0");
  return std::sqrt(dpressure(rho));
}

double PressureLaw::invariant_integral(double a, double b) const {
  if (a < 0.0 || b < 0.0) throw DomainError("invariant_integral: negative endpoint");
  if (a == b) return 0.0;
  if (auto* g = as_gamma()) {
    const double e = 0.5 * (g->gamma - 1.0);
    const double coeff = std::sqrt(g->kappa * g->gamma) / e;
    return coeff * (std::pow(b, e) - std::pow(a, e));
  }
  const auto* tab = as_tabulated();
  const double floor = std::max(tab->rho.front(), 0.0);
  if (a <= 0.0 || b <= 0.0 || a < floor || b < floor) {
    if (a == 0.0 || b == 0.0)
      throw VacuumIntegralUndefined("invariant_integral: vacuum endpoint for tabulated law");
    throw DomainError("invariant_integral: endpoint below tabulated range");
  }
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double sign = (b >= a) ? 1.0 : -1.0;
  double value;
  // Substitute tau = s^2 when the lower endpoint is small relative to the
  // upper one; the integrand sqrt(p'(s^2)) * 2/s is milder near zero.
  if (lo < 0.1 * hi) {
    value = quadrature::adaptive_simpson(
        [this, lo, hi](double s) {
          const double tau = std::clamp(s * s, lo, hi);
          return 2.0 * std::sqrt(dpressure(tau)) / s;
        },
        std::sqrt(lo), std::sqrt(hi), kTolQuad, kMaxQuadDepth);
  } else {
    value = quadrature::adaptive_simpson(
        [this](double tau) { return std::sqrt(dpressure(tau)) / tau; }, lo, hi, kTolQuad,
        kMaxQuadDepth);
  }
  return sign * value;
}

ValidationResult PressureLaw::validate() const {
  ValidationResult res;
  res.vacuum_integral_finite = is_gamma();

  // Sampling range for pointwise checks.
  double lo = 1e-3, hi = 1e3;
  const auto* tab = as_tabulated();
  if (tab) {
    hi = tab->rho.back();
    lo = tab->rho.front() > 0.0 ? tab->rho.front() : hi * 1e-6;
  }

  // Clause 1: p(0) = 0.
  if (tab && tab->rho.front() == 0.0 && tab->p.front() != 0.0) {
    res.defect = LawDefect::NonzeroAtVacuum;
    res.rho = 0.0;
    res.message = "p(0) != 0";
    return res;
  }
  if (is_gamma() && pressure(0.0) != 0.0) {
    res.defect = LawDefect::NonzeroAtVacuum;
    res.rho = 0.0;
    res.message = "p(0) != 0";
    return res;
  }

  const int n_samples = 512;
  std::vector<double> grid(n_samples);
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int k = 0; k < n_samples; ++k)
    grid[k] = std::exp(log_lo + (log_hi - log_lo) * k / (n_samples - 1));
  grid.front() = lo;
  grid.back() = hi;

  // Clause 2: p' > 0. Knot secants first (exact data), then the interpolant.
  if (tab) {
    for (std::size_t i = 0; i + 1 < tab->rho.size(); ++i) {
      if (!(tab->p[i + 1] > tab->p[i])) {
        res.defect = LawDefect::NonMonotone;
        res.rho = tab->rho[i + 1];
        res.message = "p not strictly increasing at sample";
        return res;
      }
    }
  }
  for (double r : grid) {
    if (!(dpressure(r) > 0.0)) {
      res.defect = LawDefect::NonMonotone;
      res.rho = r;
      res.message = "p'(rho) <= 0";
      return res;
    }
  }

  // Clause 3: convexity. Second divided differences at the knots, then
  // discrete second differences of the evaluated law.
  if (tab) {
    for (std::size_t i = 0; i + 2 < tab->rho.size(); ++i) {
      const double s0 = (tab->p[i + 1] - tab->p[i]) / (tab->rho[i + 1] - tab->rho[i]);
      const double s1 = (tab->p[i + 2] - tab->p[i + 1]) / (tab->rho[i + 2] - tab->rho[i + 1]);
      const double scale = std::max({std::abs(s0), std::abs(s1), 1.0});
      if (s1 - s0 < -kTolConvexity * scale) {
        res.defect = LawDefect::NonConvex;
        res.rho = tab->rho[i + 2];
        res.message = "decreasing slope between samples";
        return res;
      }
    }
  }
  for (int k = 1; k + 1 < n_samples; ++k) {
    // Non-uniform three-point second difference.
    const double rm = grid[k - 1], r0 = grid[k], rp = grid[k + 1];
    const double sl = (pressure(r0) - pressure(rm)) / (r0 - rm);
    const double sr = (pressure(rp) - pressure(r0)) / (rp - r0);
    const double scale = std::max({std::abs(sl), std::abs(sr), 1.0});
    if (sr - sl < -kTolConvexity * scale) {
      res.defect = LawDefect::NonConvex;
      res.rho = r0;
      res.message = "p not convex at sampled density";
      return res;
    }
  }
  return res;
}

}  // namespace rarefan
