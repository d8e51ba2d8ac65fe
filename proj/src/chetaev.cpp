#include "relsim/chetaev.hpp"

#include <cmath>

namespace relsim {

FieldSample sample_at(const FieldSet& fs, const State3& st, double c) {
  std::array<double, 4> q{st.r[0], st.r[1], st.r[2], c * st.t};
  return sample(fs, q, c);
}

UnconstrainedCoeffs unconstrained_coeffs(const FieldSample& s,
                                         const std::array<double, 4>& qdot) {
  UnconstrainedCoeffs out;
  for (int sigma = 0; sigma < 4; ++sigma) {
    double acc = -s.dpsi[sigma];
    for (int nu = 0; nu < 4; ++nu)
      acc += qdot[nu] * (s.dphi[nu][sigma] - s.dphi[sigma][nu]);
    out.A[sigma] = acc;
  }
  return out;
}

double constraint_normal_form(const FieldSample& s, const Vec3& qdot3, double c) {
  double d2 = s.mass_sq * c * c + norm2(qdot3);
  if (d2 <= 0.0)
    throw Error(ErrorCode::OutsideConstraintDomain,
                "M c^2 + sum qdot_p^2 = " + format_double(d2) + " is not positive");
  return std::sqrt(d2);
}

ReducedCoeffs reduced_coeffs_closed(const FieldSample& s, const Vec3& qdot3, double c) {
  ReducedCoeffs rc;
  double c2 = c * c;
  double d2 = s.mass_sq * c2 + norm2(qdot3);
  if (d2 <= 0.0)
    throw Error(ErrorCode::OutsideConstraintDomain,
                "M c^2 + sum qdot_p^2 = " + format_double(d2) + " is not positive");
  double h = std::sqrt(d2);
  rc.h = h;
  for (int l = 0; l < 3; ++l) rc.dh_dqdot[l] = qdot3[l] / h;
  for (int sigma = 0; sigma < 4; ++sigma) rc.dh_dq[sigma] = c2 * s.dmass[sigma] / (2.0 * h);
  rc.dh_ds = 0.0;

  // A_4 restricted to the constraint (the qdot4 term cancels by antisymmetry).
  double a4 = -s.dpsi[3];
  for (int i = 0; i < 3; ++i) a4 += qdot3[i] * (s.dphi[i][3] - s.dphi[3][i]);

  // dM/ds along the constrained flow, with qdot4 = h.
  double dmass_flow = h * s.dmass[3];
  for (int i = 0; i < 3; ++i) dmass_flow += qdot3[i] * s.dmass[i];

  for (int l = 0; l < 3; ++l) {
    double faraday_spatial = 0.0;
    for (int i = 0; i < 3; ++i)
      faraday_spatial += qdot3[i] * (s.dphi[i][l] - s.dphi[l][i]);
    double mixed = s.dphi[3][l] - s.dphi[l][3];
    rc.Abar[l] = faraday_spatial - s.dpsi[l] + a4 * qdot3[l] / h + h * mixed +
                 (qdot3[l] / h) * (c2 / (2.0 * h)) * dmass_flow;
    for (int j = 0; j < 3; ++j)
      rc.Bbar[l][j] = (l == j ? -1.0 : 0.0) + qdot3[l] * qdot3[j] / d2;
  }
  return rc;
}

namespace {

// First derivatives: central differences with step 1e-6 (1 + |x|).
// Second derivatives: step 1e-4 (1 + |x|); the smaller step would sit on the
// roundoff floor for second-order stencils.
constexpr double kFdStep1 = 1e-6;
constexpr double kFdStep2 = 1e-4;

double step1(double x) { return kFdStep1 * (1.0 + std::fabs(x)); }
double step2(double x) { return kFdStep2 * (1.0 + std::fabs(x)); }

struct LPoint {
  double s;
  std::array<double, 4> q;
  std::array<double, 4> qdot;
};

double eval_L(const LagrangianFn4& L, const LPoint& p) { return L(p.s, p.q, p.qdot); }

double dL_dq(const LagrangianFn4& L, LPoint p, int sigma) {
  double d = step1(p.q[sigma]);
  LPoint hi = p, lo = p;
  hi.q[sigma] += d;
  lo.q[sigma] -= d;
  return (eval_L(L, hi) - eval_L(L, lo)) / (2.0 * d);
}

double d2L_ds_dqdot(const LagrangianFn4& L, LPoint p, int sigma) {
  double ds = step2(p.s);
  double dv = step2(p.qdot[sigma]);
  LPoint pp = p, pm = p, mp = p, mm = p;
  pp.s += ds; pp.qdot[sigma] += dv;
  pm.s += ds; pm.qdot[sigma] -= dv;
  mp.s -= ds; mp.qdot[sigma] += dv;
  mm.s -= ds; mm.qdot[sigma] -= dv;
  return (eval_L(L, pp) - eval_L(L, pm) - eval_L(L, mp) + eval_L(L, mm)) /
         (4.0 * ds * dv);
}

double d2L_dq_dqdot(const LagrangianFn4& L, LPoint p, int nu, int sigma) {
  double dq = step2(p.q[nu]);
  double dv = step2(p.qdot[sigma]);
  LPoint pp = p, pm = p, mp = p, mm = p;
  pp.q[nu] += dq; pp.qdot[sigma] += dv;
  pm.q[nu] += dq; pm.qdot[sigma] -= dv;
  mp.q[nu] -= dq; mp.qdot[sigma] += dv;
  mm.q[nu] -= dq; mm.qdot[sigma] -= dv;
  return (eval_L(L, pp) - eval_L(L, pm) - eval_L(L, mp) + eval_L(L, mm)) /
         (4.0 * dq * dv);
}

double d2L_dqdot2(const LagrangianFn4& L, LPoint p, int sigma, int nu) {
  if (sigma == nu) {
    double d = step2(p.qdot[sigma]);
    LPoint hi = p, lo = p;
    hi.qdot[sigma] += d;
    lo.qdot[sigma] -= d;
    return (eval_L(L, hi) - 2.0 * eval_L(L, p) + eval_L(L, lo)) / (d * d);
  }
  double da = step2(p.qdot[sigma]);
  double db = step2(p.qdot[nu]);
  LPoint pp = p, pm = p, mp = p, mm = p;
  pp.qdot[sigma] += da; pp.qdot[nu] += db;
  pm.qdot[sigma] += da; pm.qdot[nu] -= db;
  mp.qdot[sigma] -= da; mp.qdot[nu] += db;
  mm.qdot[sigma] -= da; mm.qdot[nu] -= db;
  return (eval_L(L, pp) - eval_L(L, pm) - eval_L(L, mp) + eval_L(L, mm)) /
         (4.0 * da * db);
}

}  // namespace

ReducedCoeffs reduced_coeffs_generic(double s, const std::array<double, 4>& q,
                                     const Vec3& qdot3, const LagrangianFn4& L,
                                     const ConstraintFn& h) {
  ReducedCoeffs rc;
  rc.h = h(s, q, qdot3);

  // Partials of h by central differences.
  {
    double d = step1(s);
    rc.dh_ds = (h(s + d, q, qdot3) - h(s - d, q, qdot3)) / (2.0 * d);
  }
  for (int sigma = 0; sigma < 4; ++sigma) {
    double d = step1(q[sigma]);
    std::array<double, 4> hi = q, lo = q;
    hi[sigma] += d;
    lo[sigma] -= d;
    rc.dh_dq[sigma] = (h(s, hi, qdot3) - h(s, lo, qdot3)) / (2.0 * d);
  }
  for (int l = 0; l < 3; ++l) {
    double d = step1(qdot3[l]);
    Vec3 hi = qdot3, lo = qdot3;
    hi[l] += d;
    lo[l] -= d;
    rc.dh_dqdot[l] = (h(s, q, hi) - h(s, q, lo)) / (2.0 * d);
  }

  // Coefficients of the unconstrained system, restricted to the constraint.
  LPoint p{s, q, {qdot3[0], qdot3[1], qdot3[2], rc.h}};
  std::array<double, 4> A{};
  double B[4][4];
  for (int sigma = 0; sigma < 4; ++sigma) {
    double acc = dL_dq(L, p, sigma) - d2L_ds_dqdot(L, p, sigma);
    for (int nu = 0; nu < 4; ++nu)
      acc -= d2L_dq_dqdot(L, p, nu, sigma) * p.qdot[nu];
    A[sigma] = acc;
    for (int nu = 0; nu < 4; ++nu) B[sigma][nu] = -d2L_dqdot2(L, p, sigma, nu);
  }

  double flow = rc.dh_ds;
  for (int sigma = 0; sigma < 4; ++sigma) flow += rc.dh_dq[sigma] * p.qdot[sigma];

  for (int l = 0; l < 3; ++l) {
    rc.Abar[l] =
        A[l] + A[3] * rc.dh_dqdot[l] + (B[l][3] + B[3][3] * rc.dh_dqdot[l]) * flow;
    for (int j = 0; j < 3; ++j)
      rc.Bbar[l][j] = B[l][j] + 2.0 * B[l][3] * rc.dh_dqdot[j] +
                      B[3][3] * rc.dh_dqdot[l] * rc.dh_dqdot[j];
  }
  return rc;
}

Mat3 reduced_B_inverse(const Vec3& qdot3, double mass_sq, double c) {
  double mc2 = mass_sq * c * c;
  if (mc2 == 0.0)
    throw Error(ErrorCode::MasslessRegime, "Bbar is singular at M = 0");
  Mat3 inv;
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l)
      inv[j][l] = -((j == l ? mc2 : 0.0) + qdot3[j] * qdot3[l]) / mc2;
  return inv;
}

Vec3 rhs_4d(const FieldSample& s, const Vec3& qdot3, double c) {
  if (s.mass_sq == 0.0)
    throw Error(ErrorCode::MasslessRegime,
                "M = 0: the reduced equations cannot be put into normal form");
  double c2 = c * c;
  double h = constraint_normal_form(s, qdot3, c);
  double mc2 = s.mass_sq * c2;

  double dpsi_flow = h * s.dpsi[3];
  double dmass_flow = h * s.dmass[3];
  for (int l = 0; l < 3; ++l) {
    dpsi_flow += qdot3[l] * s.dpsi[l];
    dmass_flow += qdot3[l] * s.dmass[l];
  }

  Vec3 acc;
  for (int j = 0; j < 3; ++j) {
    double faraday_spatial = 0.0;
    for (int l = 0; l < 3; ++l)
      faraday_spatial += qdot3[l] * (s.dphi[l][j] - s.dphi[j][l]);
    acc[j] = faraday_spatial + h * (s.dphi[3][j] - s.dphi[j][3]) - s.dpsi[j] -
             (qdot3[j] / mc2) * dpsi_flow +
             (qdot3[j] / (2.0 * s.mass_sq)) * dmass_flow;
  }
  return acc;
}

double chetaev_multiplier(const FieldSample& s, const std::array<double, 4>& qdot,
                          double c) {
  if (s.mass_sq == 0.0)
    throw Error(ErrorCode::MasslessRegime, "multiplier indeterminate at M = 0");
  double c2 = c * c;
  Vec3 qdot3{qdot[0], qdot[1], qdot[2]};
  double h = constraint_normal_form(s, qdot3, c);
  double flow = 0.0;  // d/ds (1/2 M c^2 - psi) along the given four-velocity
  for (int sigma = 0; sigma < 4; ++sigma)
    flow += qdot[sigma] * (0.5 * c2 * s.dmass[sigma] - s.dpsi[sigma]);
  return h / (s.mass_sq * c2) * flow;
}

double chetaev_multiplier(const FieldSample& s, const Vec3& qdot3, double c) {
  double h = constraint_normal_form(s, qdot3, c);
  return chetaev_multiplier(s, {qdot3[0], qdot3[1], qdot3[2], h}, c);
}

namespace {

void check_regime_domain(const ParticleSpec& spec, double mass_sq, double beta2,
                         double eps) {
  double om = 1.0 - beta2;
  switch (spec.regime) {
    case Regime::Massive:
      if (om < eps)
        throw Error(ErrorCode::SpeedSingularity,
                    "massive particle approaching the light barrier, 1 - v^2/c^2 = " +
                        format_double(om));
      break;
    case Regime::Tachyon:
      if (std::sqrt(beta2) - 1.0 < eps)
        throw Error(ErrorCode::TachyonBarrier,
                    "tachyon speed dropped to the light barrier, v/c = " +
                        format_double(std::sqrt(beta2)));
      break;
    case Regime::GeneralMass:
      if (std::fabs(om) < eps)
        throw Error(ErrorCode::SpeedSingularity,
                    "1 - v^2/c^2 = " + format_double(om) + " within the barrier guard");
      if (mass_sq * om <= 0.0)
        throw Error(ErrorCode::OutsideConstraintDomain,
                    "M (1 - v^2/c^2) = " + format_double(mass_sq * om) +
                        " is not positive");
      break;
    case Regime::Massless:
      throw Error(ErrorCode::MasslessRegime,
                  "use the massless equations of motion for M = 0");
  }
}

}  // namespace

Motion3D rhs_3d(const State3& st, const FieldSet& fs, const ParticleSpec& spec,
                double c, double light_barrier_eps) {
  FieldSample s = sample_at(fs, st, c);
  double c2 = c * c;
  double beta2 = norm2(st.v) / c2;
  check_regime_domain(spec, s.mass_sq, beta2, light_barrier_eps);
  double om = 1.0 - beta2;

  Motion3D out;
  double m = std::sqrt(s.mass_sq / om);  // positive in-domain for every regime
  out.mass = m;

  Vec3 grad_psi{s.dpsi[0], s.dpsi[1], s.dpsi[2]};
  Vec3 grad_mass{s.dmass[0], s.dmass[1], s.dmass[2]};
  out.dpsi_dt = c * s.dpsi[3] + dot(st.v, grad_psi);
  out.dmass_sq_dt = c * s.dmass[3] + dot(st.v, grad_mass);

  out.forces.lorentz = lorentz_force(s, st.v, c);
  out.forces.constraint_induced =
      -(1.0 / (m * c2 * om)) * (out.dpsi_dt - 0.5 * c2 * out.dmass_sq_dt) * st.v;
  out.forces.scalar_gradient = -(1.0 / m) * grad_psi;
  out.forces.mass_flow = -(0.5 / (m * om)) * out.dmass_sq_dt * st.v;
  if (spec.regime == Regime::Massive || spec.regime == Regime::Tachyon)
    out.forces.dicke = dicke_transform(fs, spec, st, c).force;

  // d/dt (m v) = F expands to m (a + v (v.a)/(c^2 - v^2)) + v dM/dt/(2 m (1-b^2));
  // the bracket inverts to I - v v^T / c^2.
  Vec3 f = out.forces.total();  // F_L + F_C + scalar gradient, complete for M(q)
  Vec3 g = (1.0 / m) * (f - (out.dmass_sq_dt / (2.0 * m * om)) * st.v);
  out.dv_dt = g - (dot(st.v, g) / c2) * st.v;
  return out;
}

Vec3 induced_constraint_force(const State3& st, const FieldSet& fs,
                              const ParticleSpec& spec, double c) {
  return rhs_3d(st, fs, spec, c).forces.constraint_induced;
}

DickeQuantities dicke_transform(const FieldSet& fs, const ParticleSpec& spec,
                                const State3& st, double c) {
  if (spec.regime == Regime::Massless)
    throw Error(ErrorCode::MasslessRegime, "no effective-mass form for M = 0");
  if (spec.regime == Regime::GeneralMass)
    throw Error(ErrorCode::InvalidRegime,
                "effective-mass form is defined for constant-M regimes only");
  FieldSample s = sample_at(fs, st, c);
  double c2 = c * c;
  double m0c2 = spec.m0 * spec.m0 * c2;
  double sign = spec.regime == Regime::Massive ? 1.0 : -1.0;
  double mu = sign * s.psi / m0c2;

  DickeQuantities dq;
  dq.em_prefactor = std::exp(mu);
  dq.m_tilde0 = spec.m0 * dq.em_prefactor;

  Vec3 grad_mu = (sign / m0c2) * Vec3{s.dpsi[0], s.dpsi[1], s.dpsi[2]};
  Vec3 grad_mt = dq.m_tilde0 * grad_mu;

  double beta2 = norm2(st.v) / c2;
  if (spec.regime == Regime::Massive) {
    dq.force = -c2 * std::sqrt(1.0 - beta2) * grad_mt;
  } else {
    dq.force = c2 * std::sqrt(beta2 - 1.0) * grad_mt;
  }
  return dq;
}

Vec3 dicke_rhs_3d(const State3& st, const FieldSet& fs, const ParticleSpec& spec,
                  double c, double light_barrier_eps) {
  FieldSample s = sample_at(fs, st, c);
  double c2 = c * c;
  double beta2 = norm2(st.v) / c2;
  check_regime_domain(spec, s.mass_sq, beta2, light_barrier_eps);

  DickeQuantities dq = dicke_transform(fs, spec, st, c);
  double gamma = spec.regime == Regime::Massive ? 1.0 / std::sqrt(1.0 - beta2)
                                                : 1.0 / std::sqrt(beta2 - 1.0);

  Vec3 rhs = dq.em_prefactor * lorentz_force(s, st.v, c) + dq.force;

  // d m~0/dt along the flow.
  double sign = spec.regime == Regime::Massive ? 1.0 : -1.0;
  Vec3 grad_psi{s.dpsi[0], s.dpsi[1], s.dpsi[2]};
  double dpsi_dt = c * s.dpsi[3] + dot(st.v, grad_psi);
  double dmt_dt = dq.m_tilde0 * sign * dpsi_dt / (spec.m0 * spec.m0 * c2);

  // d/dt (m~0 gamma v) = m~0 gamma (a + v (v.a)/(c^2 - v^2)) + gamma v dm~0/dt.
  Vec3 g = (1.0 / (dq.m_tilde0 * gamma)) * (rhs - gamma * dmt_dt * st.v);
  return g - (dot(st.v, g) / c2) * st.v;
}

Vec3 massless_force(const FieldSample& s, const Vec3& e_v, double c) {
  Vec3 raw = lorentz_force(s, c * e_v, c);
  return raw - dot(raw, e_v) * e_v;
}

Vec3 massless_rhs(double t, const Vec3& r, const Vec3& e_v, const FieldSet& fs,
                  double energy, double c) {
  if (std::fabs(norm(e_v) - 1.0) > 1e-9)
    throw Error(ErrorCode::NonUnitDirection,
                "|e_v| = " + format_double(norm(e_v)) + " is not 1 within 1e-9");
  if (!(energy > 0.0))
    throw Error(ErrorCode::NonPositiveEnergy,
                "massless energy must be positive, got " + format_double(energy));
  std::array<double, 4> q{r[0], r[1], r[2], c * t};
  FieldSample s = sample(fs, q, c);
  return (c / energy) * massless_force(s, e_v, c);
}

CompatibilityResidual fields_compatibility(double t, const Vec3& r, const Vec3& e_v,
                                           const FieldSet& fs, double c) {
  std::array<double, 4> q{r[0], r[1], r[2], c * t};
  FieldSample s = sample(fs, q, c);
  Vec3 grad_psi{s.dpsi[0], s.dpsi[1], s.dpsi[2]};
  CompatibilityResidual res;
  res.force_dot_grad_psi = std::fabs(dot(massless_force(s, e_v, c), grad_psi));
  res.dpsi_dt = std::fabs(c * dot(e_v, grad_psi) + c * s.dpsi[3]);
  return res;
}

MassEnergy energy_mass_relations(const ParticleSpec& spec, MomentumMagnitude pm,
                                 double c) {
  double p = pm.p;
  MassEnergy out;
  switch (spec.regime) {
    case Regime::Massive:
      out.energy = c * std::sqrt(spec.m0 * spec.m0 * c * c + p * p);
      break;
    case Regime::Tachyon: {
      double m0c = spec.m0 * c;
      if (p <= m0c)
        throw Error(ErrorCode::TachyonMomentumTooSmall,
                    "tachyon momentum " + format_double(p) + " must exceed m0 c = " +
                        format_double(m0c));
      out.energy = c * std::sqrt(p * p - m0c * m0c);
      break;
    }
    case Regime::Massless:
      if (p < 0.0)
        throw Error(ErrorCode::DomainError, "momentum magnitude must be nonnegative");
      out.energy = c * p;
      break;
    case Regime::GeneralMass:
      throw Error(ErrorCode::InvalidRegime,
                  "momentum relations need a constant-M regime");
  }
  out.mass = out.energy / (c * c);
  out.qdot4 = out.energy / c;
  return out;
}

MassEnergy energy_mass_relations(const ParticleSpec& spec, SpeedMagnitude vm,
                                 double c) {
  double beta2 = vm.v * vm.v / (c * c);
  MassEnergy out;
  switch (spec.regime) {
    case Regime::Massive:
      if (beta2 >= 1.0)
        throw Error(ErrorCode::SpeedSingularity, "massive particle requires v < c");
      out.mass = spec.m0 / std::sqrt(1.0 - beta2);
      break;
    case Regime::Tachyon:
      if (beta2 <= 1.0)
        throw Error(ErrorCode::TachyonBarrier, "tachyon requires v > c");
      out.mass = spec.m0 / std::sqrt(beta2 - 1.0);
      break;
    default:
      throw Error(ErrorCode::InvalidRegime,
                  "speed relations are defined for massive and tachyonic particles");
  }
  out.energy = out.mass * c * c;
  out.qdot4 = out.mass * c;
  return out;
}

}  // namespace relsim
