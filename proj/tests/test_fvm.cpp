#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "rarefan/entropy.hpp"
#include "rarefan/errors.hpp"
#include "rarefan/field.hpp"
#include "rarefan/fvm.hpp"
#include "rarefan/pressure_law.hpp"
#include "rarefan/riemann.hpp"

namespace {

using namespace rarefan;

PressureLaw quadratic_law() { return PressureLaw::gamma_law(1.0, 2.0); }

const RiemannData kSymmetric{1.0, -1.0, 1.0, 1.0};

SimConfig symmetric_config(Grid g, double t_end, double snap) {
  return SimConfig{g, quadratic_law(), kSymmetric, 0.45, t_end, snap, {}};
}

struct Totals {
  double rho = 0.0, m1 = 0.0, m2 = 0.0;
};

Totals totals(const FieldState& f) {
  Totals s;
  const double area = f.grid.cell_area();
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    s.rho += f.rho[k] * area;
    s.m1 += f.m1[k] * area;
    s.m2 += f.m2[k] * area;
  }
  return s;
}

}  // namespace

TEST_CASE("rusanov flux reference values") {
  const PressureLaw law = quadratic_law();

  SUBCASE("equal states reproduce the exact flux") {
    const State still{1.0, 0.0, 0.0};
    const Flux3 f = numerical_flux(still, still, law, Axis::X1);
    CHECK(f.rho == 0.0);
    CHECK(f.m1 == 1.0);  // pure pressure p(1) = 1
    CHECK(f.m2 == 0.0);

    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> rho_dist(0.2, 3.0), vel(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
      const State s{rho_dist(rng), vel(rng), vel(rng)};
      const Flux3 fx = numerical_flux(s, s, law, Axis::X1);
      CHECK(fx.rho == doctest::Approx(s.rho * s.u1).epsilon(1e-14));
      CHECK(fx.m1 ==
            doctest::Approx(s.rho * s.u1 * s.u1 + law.pressure(s.rho)).epsilon(1e-14));
      CHECK(fx.m2 == doctest::Approx(s.rho * s.u1 * s.u2).epsilon(1e-14));
      const Flux3 fy = numerical_flux(s, s, law, Axis::X2);
      CHECK(fy.rho == doctest::Approx(s.rho * s.u2).epsilon(1e-14));
      CHECK(fy.m1 == doctest::Approx(s.rho * s.u1 * s.u2).epsilon(1e-14));
      CHECK(fy.m2 ==
            doctest::Approx(s.rho * s.u2 * s.u2 + law.pressure(s.rho)).epsilon(1e-14));
    }
  }

  SUBCASE("transverse momentum jump only feeds the dissipation term") {
    const double delta = 0.3;
    const State left{1.0, 0.0, 0.0};
    const State right{1.0, 0.0, delta};  // m2 = delta with unit density
    const Flux3 f = numerical_flux(left, right, law, Axis::X1);
    const double s = std::sqrt(2.0);  // both speeds are |0| + c(1)
    CHECK(f.rho == 0.0);
    CHECK(f.m1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.m2 == doctest::Approx(-0.5 * s * delta).epsilon(1e-14));
  }

  SUBCASE("hand-evaluated mixed-state flux") {
    const State left{2.0, 1.0, 0.0};
    const State right{1.0, 0.0, 0.0};
    const Flux3 f = numerical_flux(left, right, law, Axis::X1);
    CHECK(f.rho == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(f.m1 == doctest::Approx(6.5).epsilon(1e-15));
    CHECK(f.m2 == 0.0);
  }
}

TEST_CASE("config validation rejects bad setups") {
  const Grid ok{5.0, 8, 1};
  const SimConfig base = symmetric_config(ok, 1.0, 0.5);
  CHECK_NOTHROW(validate_config(base));

  SimConfig odd = base;
  odd.grid.nx1 = 9;
  CHECK_THROWS_AS(validate_config(odd), ConfigError);

  SimConfig small = base;
  small.grid.nx1 = 2;
  CHECK_THROWS_AS(validate_config(small), ConfigError);

  SimConfig cfl_low = base, cfl_high = base;
  cfl_low.cfl = 0.0;
  cfl_high.cfl = 1.0;
  CHECK_THROWS_AS(validate_config(cfl_low), ConfigError);
  CHECK_THROWS_AS(validate_config(cfl_high), ConfigError);

  SimConfig tight = base;
  tight.grid.a = 1.0;  // 1.5 * (1 + sqrt 2) * 1 far exceeds 0.95
  CHECK_THROWS_AS(validate_config(tight), ConfigError);

  SimConfig bad_rho = base;
  bad_rho.data.rho_l = 0.0;
  CHECK_THROWS_AS(validate_config(bad_rho), ConfigError);

  SimConfig orphan = base;
  orphan.perturbation.amplitude = 1e-3;  // no component
  CHECK_THROWS_AS(validate_config(orphan), ConfigError);

  SimConfig no_mode = base;
  no_mode.perturbation = {1e-3, 0, PerturbComponent::M2};
  CHECK_THROWS_AS(validate_config(no_mode), ConfigError);

  SimConfig drain = base;
  drain.perturbation = {2.0, 1, PerturbComponent::Rho};
  CHECK_THROWS_AS(validate_config(drain), ConfigError);
}

TEST_CASE("initial data sampling") {
  SUBCASE("constant data gives a uniform field") {
    const RiemannData still{1.3, 0.2, 1.3, 0.2};
    const SimConfig cfg{Grid{2.0, 6, 3}, quadratic_law(), still, 0.45, 0.4, 0.1, {}};
    const FieldState f = init(cfg);
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
      CHECK(f.rho[k] == 1.3);
      CHECK(f.m1[k] == 1.3 * 0.2);
      CHECK(f.m2[k] == 0.0);
    }
  }

  SUBCASE("the jump sits on the central face") {
    const FieldState f = init(SimConfig{Grid{5.0, 8, 1}, quadratic_law(), kSymmetric,
                                        0.45, 0.1, 0.1, {}});
    for (int i = 0; i < 8; ++i) {
      const bool left = i < 4;
      CHECK(f.rho[i] == 1.0);
      CHECK(f.m1[i] == (left ? -1.0 : 1.0));
      CHECK(f.m2[i] == 0.0);
    }
  }

  SUBCASE("perturbation adds the advertised sine profile") {
    SimConfig cfg = symmetric_config(Grid{5.0, 8, 16}, 0.1, 0.1);
    cfg.perturbation = {1e-3, 2, PerturbComponent::M2};
    const FieldState f = init(cfg);
    for (int j = 0; j < 16; ++j) {
      const double expected =
          1e-3 * std::sin(4.0 * std::numbers::pi * f.grid.x2_center(j));
      for (int i = 0; i < 8; ++i) {
        CHECK(f.m2[f.grid.index(i, j)] == doctest::Approx(expected).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("single step behavior") {
  SUBCASE("constant fields are fixed points") {
    const RiemannData still{0.8, 0.35, 0.8, 0.35};
    const SimConfig cfg{Grid{2.0, 12, 3}, quadratic_law(), still, 0.45, 0.4, 0.1, {}};
    const FieldState f0 = init(cfg);
    const FieldState f1 = step(f0, cfg);
    CHECK(f1.t > 0.0);
    CHECK(f1.rho == f0.rho);
    CHECK(f1.m1 == f0.m1);
    CHECK(f1.m2 == f0.m2);
  }

  SUBCASE("one step only touches the cells beside the jump") {
    const SimConfig cfg = symmetric_config(Grid{5.0, 8, 1}, 0.1, 0.1);
    const FieldState f0 = init(cfg);
    const FieldState f1 = step(f0, cfg);
    for (int i = 0; i < 8; ++i) {
      const bool adjacent = i == 3 || i == 4;
      if (adjacent) {
        CHECK(f1.rho[i] != f0.rho[i]);
      } else {
        CHECK(f1.rho[i] == f0.rho[i]);
        CHECK(f1.m1[i] == f0.m1[i]);
      }
    }
  }
}

TEST_CASE("conservation up to exact boundary flux accounting") {
  SUBCASE("symmetric data loses mass at rate 2") {
    const SimConfig cfg = symmetric_config(Grid{5.0, 40, 1}, 0.5, 0.5);
    FieldState f = init(cfg);
    const Totals before = totals(f);
    const double dt = stable_dt(f, cfg);
    f = step(f, cfg);
    const Totals after = totals(f);
    CHECK(after.rho - before.rho == doctest::Approx(-2.0 * dt).epsilon(1e-12));
    CHECK(std::abs(after.m1 - before.m1) <= 1e-12);  // symmetric momentum fluxes
    CHECK(after.m2 == before.m2);

    double t = dt;
    for (int n = 0; n < 10; ++n) {
      const double dtn = stable_dt(f, cfg);
      f = step(f, cfg);
      t += dtn;
    }
    const Totals later = totals(f);
    CHECK(later.rho - before.rho == doctest::Approx(-2.0 * t).epsilon(1e-10));
  }

  SUBCASE("asymmetric data follows the exterior flux difference") {
    const RiemannData data{2.0, 0.5, 1.0, -0.3};
    const PressureLaw law = quadratic_law();
    const SimConfig cfg{Grid{6.0, 48, 1}, law, data, 0.45, 0.4, 0.4, {}};
    FieldState f = init(cfg);
    const Totals before = totals(f);
    const double dt = stable_dt(f, cfg);
    f = step_with_dt(f, cfg, dt);
    const Totals after = totals(f);

    const double mass_rate = data.rho_l * data.u1_l - data.rho_r * data.u1_r;
    const double mom_rate =
        (data.rho_l * data.u1_l * data.u1_l + law.pressure(data.rho_l)) -
        (data.rho_r * data.u1_r * data.u1_r + law.pressure(data.rho_r));
    CHECK(after.rho - before.rho == doctest::Approx(dt * mass_rate).epsilon(1e-12));
    CHECK(after.m1 - before.m1 == doctest::Approx(dt * mom_rate).epsilon(1e-12));
    CHECK(after.m2 == before.m2);
  }
}

TEST_CASE("transverse constancy is preserved bitwise") {
  const SimConfig cfg1 = symmetric_config(Grid{5.0, 64, 1}, 0.3, 0.3);
  const SimConfig cfg4 = symmetric_config(Grid{5.0, 64, 4}, 0.3, 0.3);

  FieldState f1 = init(cfg1);
  FieldState f4 = init(cfg4);
  for (int n = 0; n < 20; ++n) {
    f1 = step(f1, cfg1);
    f4 = step(f4, cfg4);
  }
  // Rows stay identical, and each column matches the 1-D run exactly.
  for (int j = 0; j < cfg4.grid.nx2; ++j) {
    for (int i = 0; i < cfg4.grid.nx1; ++i) {
      const std::size_t k = cfg4.grid.index(i, j);
      CHECK(f4.rho[k] == f1.rho[i]);
      CHECK(f4.m1[k] == f1.m1[i]);
      CHECK(f4.m2[k] == 0.0);
    }
  }
}

TEST_CASE("reflection symmetry holds to the bit") {
  SimConfig cfg = symmetric_config(Grid{5.0, 64, 1}, 0.3, 0.3);
  FieldState f = init(cfg);
  for (int n = 0; n < 30; ++n) f = step(f, cfg);
  const int n1 = cfg.grid.nx1;
  for (int i = 0; i < n1; ++i) {
    CHECK(f.rho[i] == f.rho[n1 - 1 - i]);
    CHECK(f.m1[i] == -f.m1[n1 - 1 - i]);
  }
}

TEST_CASE("run cadence, determinism, and the snapshot cap") {
  SimConfig cfg = symmetric_config(Grid{5.0, 80, 1}, 0.5, 0.2);

  const std::vector<FieldState> traj = run_collect(cfg);
  REQUIRE(traj.size() == 4);
  CHECK(traj[0].t == 0.0);
  CHECK(traj[1].t == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(traj[2].t == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(traj[3].t == doctest::Approx(0.5).epsilon(1e-15));

  const std::vector<FieldState> again = run_collect(cfg);
  REQUIRE(again.size() == traj.size());
  for (std::size_t s = 0; s < traj.size(); ++s) {
    CHECK(again[s].t == traj[s].t);
    CHECK(again[s].rho == traj[s].rho);
    CHECK(again[s].m1 == traj[s].m1);
    CHECK(again[s].m2 == traj[s].m2);
  }

  SimConfig flood = cfg;
  flood.snapshot_every = 1e-3;
  CHECK_THROWS_AS(run_collect(flood), ConfigError);
}

TEST_CASE("first-order convergence toward the exact fan") {
  const PressureLaw law = quadratic_law();
  const WaveFan fan(kSymmetric, law);

  auto l1_error = [&](int nx1) {
    const SimConfig cfg = symmetric_config(Grid{5.0, nx1, 1}, 1.0, 1.0);
    const std::vector<FieldState> traj = run_collect(cfg);
    const FieldState& last = traj.back();
    double err = 0.0;
    for (int i = 0; i < nx1; ++i) {
      const double x = last.grid.x1_center(i);
      err += std::abs(last.rho[i] - fan.evaluate(x / last.t).rho) * last.grid.h1();
    }
    return err;
  };

  const double coarse = l1_error(200);
  const double fine = l1_error(400);
  CHECK(fine <= coarse / 1.4);
  CHECK(coarse < 0.5);  // sanity scale for the benchmark
}

TEST_CASE("discrete energy inequality along a run") {
  const SimConfig cfg = symmetric_config(Grid{5.0, 200, 1}, 1.0, 0.25);
  const std::vector<FieldState> traj = run_collect(cfg);
  const std::vector<double> slack = energy_budget(traj, cfg.law, cfg.data);

  double eta_scale = 1.0;
  {
    const FieldState& f0 = traj.front();
    double eta = 0.0;
    for (std::size_t k = 0; k < f0.grid.size(); ++k) {
      const State s{f0.rho[k], f0.m1[k] / f0.rho[k], 0.0};
      eta += entropy_pair(s, cfg.law).eta * f0.grid.cell_area();
    }
    eta_scale = std::max(1.0, std::abs(eta));
  }
  for (std::size_t s = 0; s < slack.size(); ++s) {
    CHECK(slack[s] <= 1e-10 * eta_scale * traj[s].t + 1e-14 * eta_scale);
  }
  CHECK(slack.back() < -1e-4);  // the scheme genuinely dissipates
}

TEST_CASE("perturbed two-dimensional runs stay close to the fan") {
  const PressureLaw law = quadratic_law();
  const WaveFan fan(kSymmetric, law);

  SimConfig flat = symmetric_config(Grid{5.0, 100, 8}, 0.5, 0.5);
  SimConfig wavy = flat;
  wavy.perturbation = {1e-3, 2, PerturbComponent::M2};

  const std::vector<FieldState> base = run_collect(flat);
  const std::vector<FieldState> pert = run_collect(wavy);
  const double e_base = total_relative_entropy(base.back(), fan, base.back().t);
  const double e_pert = total_relative_entropy(pert.back(), fan, pert.back().t);
  CHECK(e_pert <= 4.0 * e_base + 1e-12);
  CHECK(e_base > 0.0);
}

TEST_CASE("stepper input guards") {
  const SimConfig cfg = symmetric_config(Grid{5.0, 8, 1}, 0.1, 0.1);
  const FieldState f = init(cfg);

  CHECK_THROWS_AS(step_with_dt(f, cfg, 0.0), CflViolation);
  CHECK_THROWS_AS(step_with_dt(f, cfg, -0.1), CflViolation);
  CHECK_THROWS_AS(step_with_dt(f, cfg, std::numeric_limits<double>::quiet_NaN()),
                  CflViolation);
  // A step exceeding h1 / |u1| drains the interface cells below zero.
  CHECK_THROWS_AS(step_with_dt(f, cfg, 2.0), NegativeDensity);
}
