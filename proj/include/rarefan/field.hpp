#ifndef RAREFAN_FIELD_HPP
#define RAREFAN_FIELD_HPP

#include <cstddef>
#include <vector>

#include "rarefan/errors.hpp"

namespace rarefan {

// Pointwise flow state: density and velocity. Vacuum (rho == 0) is legal;
// kinetic quantities are treated as zero there.
struct State {
  double rho = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
};

// Uniform grid on (-a,a) x T^1. The torus length is normalized to 1 and the
// x2 direction is always periodic. nx1 must be even so that x1 = 0 falls on a
// cell face; nx2 = 1 degenerates to a 1-D grid.
struct Grid {
  double a = 1.0;
  int nx1 = 4;
  int nx2 = 1;

  double h1() const { return 2.0 * a / nx1; }
  double h2() const { return 1.0 / nx2; }
  double cell_area() const { return h1() * h2(); }
  double x1_center(int i) const { return -a + (i + 0.5) * h1(); }
  double x2_center(int j) const { return (j + 0.5) * h2(); }
  std::size_t size() const { return static_cast<std::size_t>(nx1) * nx2; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx1 + i; }

  bool operator==(const Grid& o) const { return a == o.a && nx1 == o.nx1 && nx2 == o.nx2; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Conserved variables (rho, m1, m2) as cell averages at one time instant.
struct FieldState {
  double t = 0.0;
  Grid grid;
  std::vector<double> rho;
  std::vector<double> m1;
  std::vector<double> m2;

  static FieldState zeros(const Grid& g, double t = 0.0) {
    FieldState f;
    f.t = t;
    f.grid = g;
    f.rho.assign(g.size(), 0.0);
    f.m1.assign(g.size(), 0.0);
    f.m2.assign(g.size(), 0.0);
    return f;
  }

  bool congruent(const Grid& g) const {
    return grid == g && rho.size() == g.size() && m1.size() == g.size() && m2.size() == g.size();
  }
};

inline void require_congruent(const FieldState& f, const Grid& g, const char* where) {
  if (!f.congruent(g))
    throw GridMismatch(std::string(where) + ": field arrays do not match the grid");
}

}  // namespace rarefan

#endif
