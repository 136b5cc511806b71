#ifndef RAREFAN_PRESSURE_LAW_HPP
#define RAREFAN_PRESSURE_LAW_HPP

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "rarefan/errors.hpp"

namespace rarefan {

// p(rho) = kappa * rho^gamma with kappa > 0, gamma > 1.
struct GammaLaw {
  double kappa = 1.0;
  double gamma = 2.0;
};

// Sampled (rho, p) pairs with strictly increasing rho, interpolated by a
// monotone piecewise-cubic Hermite. The knot slopes are fixed at construction.
struct TabulatedLaw {
  std::vector<double> rho;
  std::vector<double> p;
  std::vector<double> slope;  // Hermite slope at each knot
};

enum class LawDefect { None, NonzeroAtVacuum, NonMonotone, NonConvex };

struct ValidationResult {
  LawDefect defect = LawDefect::None;
  double rho = 0.0;  // offending density when defect != None
  std::string message;
  // Whether integrals of sqrt(p')/tau down to rho = 0 are available.
  // True for gamma laws (closed form, finite for gamma > 1); false for
  // tabulated laws, where the behaviour of p' near vacuum is unknown.
  bool vacuum_integral_finite = false;

  bool ok() const { return defect == LawDefect::None; }
};

const char* to_string(LawDefect d);

// Convex barotropic pressure law together with every thermodynamic function
// derived from it: the pressure potential H(rho) = rho * int_1^rho p(z)/z^2 dz,
// its derivative, the sound speed sqrt(p'), and the velocity increment
// int sqrt(p'(tau))/tau dtau carried by rarefaction curves.
class PressureLaw {
 public:
  // Throws DomainError on syntactically malformed parameters
  // (kappa <= 0, gamma <= 1; fewer than 3 samples or non-increasing rho).
  static PressureLaw gamma_law(double kappa, double gamma);
  static PressureLaw tabulated(std::vector<double> rho, std::vector<double> p);

  // Checks the structural conditions p(0) = 0, p' > 0, p convex, reporting
  // the first violated clause with the offending density.
  ValidationResult validate() const;

  double pressure(double rho) const;    // p
  double dpressure(double rho) const;   // p'
  double d2pressure(double rho) const;  // p''

  // H(rho); closed form for gamma laws, adaptive quadrature otherwise.
  double pressure_potential(double rho) const;
  // H'(rho) = H(rho)/rho + p(rho)/rho, so rho*H' - H = p holds by construction.
  double dpressure_potential(double rho) const;

  double sound_speed(double rho) const;  // sqrt(p'(rho)), rho > 0

  // Signed integral int_a^b sqrt(p'(tau))/tau dtau. Gamma laws use the closed
  // form 2*sqrt(kappa*gamma)/(gamma-1) * (b^((gamma-1)/2) - a^((gamma-1)/2)),
  // which extends continuously to a vacuum endpoint. Tabulated laws integrate
  // numerically and refuse vacuum endpoints (VacuumIntegralUndefined).
  double invariant_integral(double a, double b) const;

  bool is_gamma() const { return std::holds_alternative<GammaLaw>(law_); }
  const GammaLaw* as_gamma() const { return std::get_if<GammaLaw>(&law_); }
  const TabulatedLaw* as_tabulated() const { return std::get_if<TabulatedLaw>(&law_); }

  // Smallest density at which a tabulated law is defined (0 for gamma laws).
  double min_density() const;

 private:
  PressureLaw() = default;
  std::variant<GammaLaw, TabulatedLaw> law_;
};

namespace quadrature {
// Adaptive Simpson on [a,b] to absolute tolerance tol; throws
// QuadratureFailure past max_depth subdivision levels.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth);
}  // namespace quadrature

constexpr double kTolQuad = 1e-10;       // absolute quadrature tolerance
constexpr int kMaxQuadDepth = 60;        // subdivision levels
constexpr double kTolConvexity = 1e-12;  // relative convexity slack in validate

}  // namespace rarefan

#endif
