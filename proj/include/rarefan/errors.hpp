#ifndef RAREFAN_ERRORS_HPP
#define RAREFAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rarefan {

// Thrown when an argument is outside the mathematical domain of an operation
// (e.g. density <= 0 where a positive density is required).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Adaptive quadrature exhausted its subdivision budget before reaching tolerance.
struct QuadratureFailure : std::runtime_error {
  explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

// Integrals of sqrt(p')/tau down to vacuum are only available in closed form;
// tabulated laws cannot evaluate them.
struct VacuumIntegralUndefined : std::runtime_error {
  explicit VacuumIntegralUndefined(const std::string& what) : std::runtime_error(what) {}
};

struct RootFindingFailure : std::runtime_error {
  explicit RootFindingFailure(const std::string& what) : std::runtime_error(what) {}
};

// Operation requires a different wave-pattern regime than the data produces.
struct WrongRegime : std::runtime_error {
  explicit WrongRegime(const std::string& what) : std::runtime_error(what) {}
};

struct GridMismatch : std::runtime_error {
  explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveReference : std::runtime_error {
  explicit NonPositiveReference(const std::string& what) : std::runtime_error(what) {}
};

// A finite-difference sample would straddle a fan edge.
struct SamplingOnKink : std::runtime_error {
  explicit SamplingOnKink(const std::string& what) : std::runtime_error(what) {}
};

struct VacuumCell : std::runtime_error {
  explicit VacuumCell(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct CflViolation : std::runtime_error {
  explicit CflViolation(const std::string& what) : std::runtime_error(what) {}
};

struct NegativeDensity : std::runtime_error {
  explicit NegativeDensity(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rarefan

#endif
