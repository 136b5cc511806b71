#include "rarefan/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rarefan {

namespace {

// Compensated accumulator; summation order is the fixed cell sweep, so
// results are bit-identical across repeated runs.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double value) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double bregman_h(double rho, double r, const PressureLaw& law) {
  return law.pressure_potential(rho) - law.dpressure_potential(r) * (rho - r) -
         law.pressure_potential(r);
}

struct CellVelocity {
  double u1 = 0.0, u2 = 0.0;
  bool vacuum = false;
};

CellVelocity cell_velocity(const FieldState& f, std::size_t k) {
  CellVelocity v;
  if (f.rho[k] < kVacuumFloor) {
    v.vacuum = true;
  } else {
    v.u1 = f.m1[k] / f.rho[k];
    v.u2 = f.m2[k] / f.rho[k];
  }
  return v;
}

double total_eta(const FieldState& f, const PressureLaw& law) {
  require_congruent(f, f.grid, "total_eta");
  KahanSum acc;
  const double area = f.grid.cell_area();
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    const CellVelocity v = cell_velocity(f, k);
    if (v.vacuum) {
      acc.add(law.pressure_potential(f.rho[k]) * area);
    } else {
      acc.add(entropy_pair({f.rho[k], v.u1, v.u2}, law).eta * area);
    }
  }
  return acc.sum;
}

double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// O(h^4) first derivative: one Richardson step over central differences.
double richardson_d1(const std::function<double(double)>& f, double x, double h) {
  const double d_h = central(f, x, h);
  const double d_h2 = central(f, x, 0.5 * h);
  return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace

EntropyPair entropy_pair(const State& s, const PressureLaw& law) {
  EntropyPair out;
  if (s.rho < 0.0) throw DomainError("entropy_pair: rho < 0");
  if (s.rho == 0.0) return out;
  const double kinetic = 0.5 * s.rho * (s.u1 * s.u1 + s.u2 * s.u2);
  out.eta = kinetic + law.pressure_potential(s.rho);
  out.q1 = (out.eta + law.pressure(s.rho)) * s.u1;
  return out;
}

double relative_entropy(const State& s, const State& ref, const PressureLaw& law) {
  if (!(ref.rho > 0.0)) throw DomainError("relative_entropy: reference rho <= 0");
  if (s.rho < 0.0) throw DomainError("relative_entropy: rho < 0");
  const double du1 = s.u1 - ref.u1;
  const double du2 = s.u2 - ref.u2;
  const double kinetic = 0.5 * s.rho * (du1 * du1 + du2 * du2);
  return kinetic + bregman_h(s.rho, ref.rho, law);
}

FanPoint reference_at(const WaveFan& fan, double x1, double t) {
  if (t > 0.0) return fan.evaluate(x1 / t);
  const RiemannData& d = fan.data();
  return x1 <= 0.0 ? FanPoint{d.rho_l, d.u1_l} : FanPoint{d.rho_r, d.u1_r};
}

double total_relative_entropy(const FieldState& field, const WaveFan& fan, double t_ref) {
  require_congruent(field, field.grid, "total_relative_entropy");
  if (t_ref < 0.0) throw DomainError("total_relative_entropy: t_ref < 0");
  const Grid& g = field.grid;
  const PressureLaw& law = fan.law();
  std::vector<FanPoint> column(g.nx1);
  for (int i = 0; i < g.nx1; ++i) column[i] = reference_at(fan, g.x1_center(i), t_ref);
  KahanSum acc;
  const double area = g.cell_area();
  for (int j = 0; j < g.nx2; ++j) {
    for (int i = 0; i < g.nx1; ++i) {
      const std::size_t k = g.index(i, j);
      const FanPoint& ref = column[i];
      const CellVelocity v = cell_velocity(field, k);
      double e;
      if (v.vacuum) {
        e = bregman_h(field.rho[k], ref.rho, law);
      } else {
        e = relative_entropy({field.rho[k], v.u1, v.u2}, {ref.rho, ref.u1, 0.0}, law);
      }
      acc.add(e * area);
    }
  }
  return acc.sum;
}

double rei2_rhs(const FieldState& field, const WaveFan& fan, double t_ref) {
  require_congruent(field, field.grid, "rei2_rhs");
  if (t_ref <= 0.0) return 0.0;
  const Grid& g = field.grid;
  const PressureLaw& law = fan.law();
  struct ColumnRef {
    FanPoint pt;
    double slope;  // d_x1 of the fan velocity at the cell center
  };
  std::vector<ColumnRef> column(g.nx1);
  for (int i = 0; i < g.nx1; ++i) {
    const double xi = g.x1_center(i) / t_ref;
    column[i].pt = fan.evaluate(xi);
    column[i].slope = fan.du1_dxi(xi) / t_ref;
  }
  KahanSum acc;
  const double area = g.cell_area();
  for (int j = 0; j < g.nx2; ++j) {
    for (int i = 0; i < g.nx1; ++i) {
      const ColumnRef& ref = column[i];
      if (ref.slope == 0.0) continue;
      const std::size_t k = g.index(i, j);
      const double rho = field.rho[k];
      const CellVelocity v = cell_velocity(field, k);
      double quad = 0.0;
      if (!v.vacuum) {
        const double du = ref.pt.u1 - v.u1;
        quad = rho * du * du;
      }
      const double bregman_p = law.pressure(rho) -
                               law.dpressure(ref.pt.rho) * (rho - ref.pt.rho) -
                               law.pressure(ref.pt.rho);
      acc.add(-(quad + bregman_p) * ref.slope * area);
    }
  }
  return acc.sum;
}

ReferenceFlow fan_reference(const WaveFan& fan) {
  ReferenceFlow ref;
  ref.value = [&fan](double t, double x1, double) {
    const FanPoint pt = reference_at(fan, x1, t);
    return ReferencePoint{pt.rho, pt.u1, 0.0};
  };
  ref.derivs = [&fan](double t, double x1, double) {
    ReferenceDerivs d;
    if (t <= 0.0) return d;
    const double xi = x1 / t;
    d.dx1_r = fan.drho_dxi(xi) / t;
    d.dx1_u1 = fan.du1_dxi(xi) / t;
    d.dt_r = -xi * d.dx1_r;
    d.dt_u1 = -xi * d.dx1_u1;
    return d;
  };
  return ref;
}

ReferenceFlow constant_reference(const State& s) {
  if (!(s.rho > 0.0)) throw NonPositiveReference("constant_reference: rho <= 0");
  ReferenceFlow ref;
  const State state = s;
  ref.value = [state](double, double, double) {
    return ReferencePoint{state.rho, state.u1, state.u2};
  };
  ref.derivs = [](double, double, double) { return ReferenceDerivs{}; };
  return ref;
}

namespace {

// Interior right-hand-side integrand of the relative entropy inequality for a
// general C1 reference pair.
double rei_interior(const FieldState& field, const ReferenceFlow& ref,
                    const PressureLaw& law) {
  const Grid& g = field.grid;
  KahanSum acc;
  const double area = g.cell_area();
  for (int j = 0; j < g.nx2; ++j) {
    for (int i = 0; i < g.nx1; ++i) {
      const std::size_t k = g.index(i, j);
      const double x1 = g.x1_center(i);
      const double x2 = g.x2_center(j);
      const ReferencePoint rp = ref.value(field.t, x1, x2);
      if (!(rp.r > 0.0)) throw NonPositiveReference("rei_full_residual: reference rho <= 0");
      const ReferenceDerivs rd = ref.derivs(field.t, x1, x2);
      const double rho = field.rho[k];
      const CellVelocity v = cell_velocity(field, k);

      const double adv1 = rd.dt_u1 + v.u1 * rd.dx1_u1 + v.u2 * rd.dx2_u1;
      const double adv2 = rd.dt_u2 + v.u1 * rd.dx1_u2 + v.u2 * rd.dx2_u2;
      const double transport =
          rho * (adv1 * (rp.u1 - v.u1) + adv2 * (rp.u2 - v.u2));
      const double div_u = rd.dx1_u1 + rd.dx2_u2;
      const double pressure_term = (law.pressure(rp.r) - law.pressure(rho)) * div_u;

      // d H'(r) = (p'(r)/r) dr by the chain rule.
      const double hpp = law.dpressure(rp.r) / rp.r;
      const double relaxation =
          (rp.r - rho) * hpp * rd.dt_r +
          ((rp.r * rp.u1 - rho * v.u1) * hpp * rd.dx1_r +
           (rp.r * rp.u2 - rho * v.u2) * hpp * rd.dx2_r);

      acc.add((transport + pressure_term + relaxation) * area);
    }
  }
  return acc.sum;
}

// x2-line integrals of the boundary terms at x1 = +a and -a.
double rei_boundary(double t, const Grid& g, const ReferenceFlow& ref,
                    const PressureLaw& law, const RiemannData& bc) {
  KahanSum acc;
  const double h2 = g.h2();
  const State right{bc.rho_r, bc.u1_r, 0.0};
  const State left{bc.rho_l, bc.u1_l, 0.0};
  for (int j = 0; j < g.nx2; ++j) {
    const double x2 = g.x2_center(j);
    const ReferencePoint rr = ref.value(t, g.a, x2);
    const ReferencePoint rl = ref.value(t, -g.a, x2);
    if (!(rr.r > 0.0) || !(rl.r > 0.0))
      throw NonPositiveReference("rei_full_residual: reference rho <= 0 on boundary");
    double line = relative_entropy(right, {rr.r, rr.u1, rr.u2}, law) * bc.u1_r;
    line -= relative_entropy(left, {rl.r, rl.u1, rl.u2}, law) * bc.u1_l;
    line += (law.pressure(bc.rho_r) - law.pressure(rr.r)) * (bc.u1_r - rr.u1);
    line -= (law.pressure(bc.rho_l) - law.pressure(rl.r)) * (bc.u1_l - rl.u1);
    acc.add(line * h2);
  }
  return acc.sum;
}

double rei_total_entropy(const FieldState& field, const ReferenceFlow& ref,
                         const PressureLaw& law) {
  const Grid& g = field.grid;
  KahanSum acc;
  const double area = g.cell_area();
  for (int j = 0; j < g.nx2; ++j) {
    for (int i = 0; i < g.nx1; ++i) {
      const std::size_t k = g.index(i, j);
      const ReferencePoint rp = ref.value(field.t, g.x1_center(i), g.x2_center(j));
      if (!(rp.r > 0.0)) throw NonPositiveReference("rei_full_residual: reference rho <= 0");
      const CellVelocity v = cell_velocity(field, k);
      double e;
      if (v.vacuum) {
        e = bregman_h(field.rho[k], rp.r, law);
      } else {
        e = relative_entropy({field.rho[k], v.u1, v.u2}, {rp.r, rp.u1, rp.u2}, law);
      }
      acc.add(e * area);
    }
  }
  return acc.sum;
}

}  // namespace

double rei_interior_power(const FieldState& field, const ReferenceFlow& ref,
                          const PressureLaw& law) {
  require_congruent(field, field.grid, "rei_interior_power");
  return rei_interior(field, ref, law);
}

std::vector<double> rei_full_residual(const std::vector<FieldState>& trajectory,
                                      const ReferenceFlow& ref, const PressureLaw& law,
                                      const RiemannData& boundary) {
  if (trajectory.size() < 2)
    throw DomainError("rei_full_residual: need at least two snapshots");
  const Grid& g = trajectory.front().grid;
  for (const FieldState& f : trajectory) {
    require_congruent(f, g, "rei_full_residual");
  }
  std::vector<double> residuals;
  residuals.reserve(trajectory.size() - 1);
  double e_prev = rei_total_entropy(trajectory.front(), ref, law);
  double b_prev = rei_boundary(trajectory.front().t, g, ref, law, boundary);
  double rhs_prev = rei_interior(trajectory.front(), ref, law);
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    const FieldState& f = trajectory[k];
    const double dt = f.t - trajectory[k - 1].t;
    if (!(dt > 0.0)) throw DomainError("rei_full_residual: times must strictly increase");
    const double e_here = rei_total_entropy(f, ref, law);
    const double b_here = rei_boundary(f.t, g, ref, law, boundary);
    const double rhs_here = rei_interior(f, ref, law);
    const double lhs = (e_here - e_prev) + 0.5 * dt * (b_prev + b_here);
    const double rhs = 0.5 * dt * (rhs_prev + rhs_here);
    residuals.push_back(lhs - rhs);
    e_prev = e_here;
    b_prev = b_here;
    rhs_prev = rhs_here;
  }
  return residuals;
}

IdentityDefects check_identities(const WaveFan& fan, double t,
                                 const std::vector<double>& sample_points,
                                 const IdentityOptions& opts) {
  if (!(t > 0.0)) throw DomainError("check_identities: t <= 0");
  const PressureLaw& law = fan.law();
  const FanSpeeds sp = fan.speeds();
  const double guard = opts.guard * opts.h / t;
  // Fixed free test states (rho, u1), independent of the fan.
  const double free_states[2][2] = {{0.7, 0.3}, {2.0, -0.5}};
  IdentityDefects defects;

  for (double x1 : sample_points) {
    const double xi = x1 / t;
    for (double edge : {sp.xi_1l, sp.xi_1c, sp.xi_2c, sp.xi_2r}) {
      if (std::abs(xi - edge) * t <= guard * t * (1.0 + std::abs(xi)))
        throw SamplingOnKink("check_identities: sample within the stencil of a fan edge");
    }
    const FanPoint here = fan.evaluate(xi);
    const double rho_f = here.rho;
    const double u_f = here.u1;

    auto u_of_x = [&](double x) { return fan.evaluate(x / t).u1; };
    auto u_of_t = [&](double tau) { return fan.evaluate(x1 / tau).u1; };
    auto rho_of_x = [&](double x) { return fan.evaluate(x / t).rho; };
    auto rho_of_t = [&](double tau) { return fan.evaluate(x1 / tau).rho; };
    auto hp_of_x = [&](double x) { return law.dpressure_potential(fan.evaluate(x / t).rho); };
    auto hp_of_t = [&](double tau) {
      return law.dpressure_potential(fan.evaluate(x1 / tau).rho);
    };

    const double dx_u = richardson_d1(u_of_x, x1, opts.h);
    const double dt_u = richardson_d1(u_of_t, t, opts.h);
    const double dx_rho = richardson_d1(rho_of_x, x1, opts.h);
    const double dt_rho = richardson_d1(rho_of_t, t, opts.h);
    const double dx_hp = richardson_d1(hp_of_x, x1, opts.h);
    const double dt_hp = richardson_d1(hp_of_t, t, opts.h);
    const double dxu_exact = fan.du1_dxi(xi) / t;
    const double dp_f = law.dpressure(rho_f);

    for (const auto& fs : free_states) {
      const double rho = fs[0];
      const double u1 = fs[1];
      const double diff = u_f - u1;

      // Advective term rewritten through the fan momentum balance.
      const double s1_lhs = rho * (dt_u + u1 * dx_u) * diff;
      const double s1_rhs =
          -(rho / rho_f) * dp_f * dx_rho * diff - rho * dx_u * diff * diff;
      defects.s1 = std::max(defects.s1, std::abs(s1_lhs - s1_rhs));

      // Pure algebraic rearrangement of the pressure difference.
      const double s2_lhs = (law.pressure(rho_f) - law.pressure(rho)) * dxu_exact;
      const double s2_rhs =
          -dp_f * (rho - rho_f) * dxu_exact -
          (law.pressure(rho) - dp_f * (rho - rho_f) - law.pressure(rho_f)) * dxu_exact;
      defects.s2 = std::max(defects.s2, std::abs(s2_lhs - s2_rhs));

      // Chain rule through H''(r) = p'(r)/r.
      const double s3_lhs = (rho_f - rho) * dt_hp + (rho_f * u_f - rho * u1) * dx_hp;
      const double s3_rhs = dp_f * dt_rho - (rho / rho_f) * dp_f * dt_rho +
                            u_f * dp_f * dx_rho - (rho / rho_f) * u1 * dp_f * dx_rho;
      defects.s3 = std::max(defects.s3, std::abs(s3_lhs - s3_rhs));
    }
  }
  return defects;
}

double one_sided_bound(const FieldState& field) {
  require_congruent(field, field.grid, "one_sided_bound");
  const Grid& g = field.grid;
  const double h1 = g.h1(), h2 = g.h2();
  std::vector<double> u1(g.size()), u2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (field.rho[k] < kVacuumFloor)
      throw VacuumCell("one_sided_bound: density below vacuum floor");
    u1[k] = field.m1[k] / field.rho[k];
    u2[k] = field.m2[k] / field.rho[k];
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.nx2; ++j) {
    const int jp = (j + 1) % g.nx2;
    const int jm = (j + g.nx2 - 1) % g.nx2;
    for (int i = 1; i + 1 < g.nx1; ++i) {
      const std::size_t ke = g.index(i + 1, j), kw = g.index(i - 1, j);
      const std::size_t kn = g.index(i, jp), ks = g.index(i, jm);
      const double g11 = 2.0 * (u1[ke] - u1[kw]) / (2.0 * h1);
      const double g22 = 2.0 * (u2[kn] - u2[ks]) / (2.0 * h2);
      const double g12 =
          (u2[ke] - u2[kw]) / (2.0 * h1) + (u1[kn] - u1[ks]) / (2.0 * h2);
      const double mean = 0.5 * (g11 + g22);
      const double dev = 0.5 * (g11 - g22);
      const double eig = mean - std::sqrt(dev * dev + g12 * g12);
      min_eig = std::min(min_eig, eig);
    }
  }
  return min_eig;
}

std::vector<double> energy_budget(const std::vector<FieldState>& trajectory,
                                  const PressureLaw& law, const RiemannData& boundary) {
  if (trajectory.empty()) throw DomainError("energy_budget: empty trajectory");
  const Grid& g = trajectory.front().grid;
  for (const FieldState& f : trajectory) require_congruent(f, g, "energy_budget");
  const double flux_r = entropy_pair({boundary.rho_r, boundary.u1_r, 0.0}, law).q1;
  const double flux_l = entropy_pair({boundary.rho_l, boundary.u1_l, 0.0}, law).q1;
  const double t0 = trajectory.front().t;
  const double eta0 = total_eta(trajectory.front(), law);
  std::vector<double> slack;
  slack.reserve(trajectory.size());
  for (const FieldState& f : trajectory) {
    const double eta = total_eta(f, law);
    slack.push_back(eta - eta0 + (f.t - t0) * (flux_r - flux_l));
  }
  return slack;
}

CertificateReport make_certificate(const std::vector<FieldState>& trajectory,
                                   const WaveFan& fan, double dt,
                                   const CertificateOptions& opts) {
  if (trajectory.empty()) throw DomainError("make_certificate: empty trajectory");
  const Grid& g = trajectory.front().grid;
  for (const FieldState& f : trajectory) require_congruent(f, g, "make_certificate");

  CertificateReport rep;
  const PressureLaw& law = fan.law();
  rep.energy_slack = energy_budget(trajectory, law, fan.data());
  double eta_scale = 1.0;
  for (const FieldState& f : trajectory) {
    rep.times.push_back(f.t);
    rep.total_relative_entropy.push_back(total_relative_entropy(f, fan, f.t));
    rep.rei2_rhs.push_back(rei2_rhs(f, fan, f.t));
    int vacuum = 0;
    for (double rho : f.rho)
      if (rho < kVacuumFloor) ++vacuum;
    rep.vacuum_cells.push_back(vacuum);
    if (vacuum == 0) {
      rep.one_sided_min_eig.push_back(one_sided_bound(f));
    } else {
      rep.one_sided_min_eig.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    eta_scale = std::max(eta_scale, std::abs(total_eta(f, law)));
  }

  rep.tol_rei = opts.tol_rei_coeff * (g.h1() + dt);
  rep.entropy_nonincreasing = true;
  for (std::size_t k = 1; k < rep.times.size(); ++k) {
    // The fan reference exists for t > 0 only; the jump from the exact
    // initial data (where the distance is zero by construction) to the
    // first positive time measures the formation of discretization error,
    // not an entropy production of the evolution, so decay is enforced
    // among positive-time snapshots.
    if (rep.times[k - 1] <= 0.0) continue;
    if (rep.total_relative_entropy[k] >
        rep.total_relative_entropy[k - 1] + rep.tol_rei) {
      rep.entropy_nonincreasing = false;
    }
  }

  const double t0 = rep.times.front();
  rep.energy_admissible = true;
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    const double tol_k =
        eta_scale * (1e-14 + opts.tol_energy_per_time * (rep.times[k] - t0));
    if (rep.energy_slack[k] > tol_k) rep.energy_admissible = false;
    if (k + 1 == rep.times.size()) rep.tol_energy = tol_k;
  }

  rep.verdict = rep.entropy_nonincreasing && rep.energy_admissible;
  return rep;
}

}  // namespace rarefan
