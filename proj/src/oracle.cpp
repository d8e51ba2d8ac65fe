#include "relsim/oracle.hpp"

#include <cmath>

namespace relsim {

LagrangianFn4 make_universal_lagrangian(const FieldSet& fs, double c) {
  return [fs, c](double, const std::array<double, 4>& q,
                 const std::array<double, 4>& qdot) {
    double quad = qdot[3] * qdot[3];
    for (int p = 0; p < 3; ++p) quad -= qdot[p] * qdot[p];
    double val = -0.5 * quad;
    for (int sigma = 0; sigma < 4; ++sigma)
      val += qdot[sigma] * fs.phi[sigma].value(q, c, fs.param_values);
    val -= fs.psi.value(q, c, fs.param_values);
    return val;
  };
}

ConstraintFn make_constraint_normal_form(const FieldSet& fs, double c) {
  return [fs, c](double, const std::array<double, 4>& q, const Vec3& qdot3) {
    double d2 = fs.mass_sq.value(q, c, fs.param_values) * c * c + norm2(qdot3);
    if (d2 <= 0.0)
      throw Error(ErrorCode::OutsideConstraintDomain,
                  "constraint radicand " + format_double(d2) + " is not positive");
    return std::sqrt(d2);
  };
}

LagrangianFn3 make_charged_particle_lagrangian(const FieldSet& fs, double m0,
                                               double charge_e, double c) {
  return [fs, m0, charge_e, c](double t, const Vec3& r, const Vec3& v) {
    double om = 1.0 - norm2(v) / (c * c);
    double val = -m0 * c * c * std::sqrt(om);
    if (charge_e != 0.0) {
      EmDecomposition em = em_3d(fs, t, r, charge_e, c);
      val += (charge_e / c) * dot(em.vector_potential, v) -
             charge_e * em.scalar_potential;
    }
    return val;
  };
}

namespace {

constexpr double kFdStep = 1e-6;

double fd_step(double x) { return kFdStep * (1.0 + std::fabs(x)); }

Vec3 dL_dr(const LagrangianFn3& L, double t, const Vec3& r, const Vec3& v) {
  Vec3 g;
  for (int l = 0; l < 3; ++l) {
    double d = fd_step(r[l]);
    Vec3 hi = r, lo = r;
    hi[l] += d;
    lo[l] -= d;
    g[l] = (L(t, hi, v) - L(t, lo, v)) / (2.0 * d);
  }
  return g;
}

Vec3 dL_dv(const LagrangianFn3& L, double t, const Vec3& r, const Vec3& v) {
  Vec3 g;
  for (int l = 0; l < 3; ++l) {
    double d = fd_step(v[l]);
    Vec3 hi = v, lo = v;
    hi[l] += d;
    lo[l] -= d;
    g[l] = (L(t, r, hi) - L(t, r, lo)) / (2.0 * d);
  }
  return g;
}

}  // namespace

std::vector<Vec3> el_residual_3d(const LagrangianFn3& lagrangian,
                                 const Trajectory& traj) {
  const auto& ss = traj.samples;
  if (ss.size() < 5)
    throw Error(ErrorCode::InsufficientSampling,
                "Euler-Lagrange residual needs at least 5 trajectory samples");

  std::vector<Vec3> momenta(ss.size());
  for (std::size_t k = 0; k < ss.size(); ++k)
    momenta[k] = dL_dv(lagrangian, ss[k].t, ss[k].r, ss[k].v);

  double dt = (ss.back().t - ss.front().t) / static_cast<double>(ss.size() - 1);
  std::vector<Vec3> residuals(ss.size());
  for (std::size_t k = 2; k + 2 < ss.size(); ++k) {
    Vec3 dq = dL_dr(lagrangian, ss[k].t, ss[k].r, ss[k].v);
    for (int l = 0; l < 3; ++l) {
      double ddt = (-momenta[k + 2][l] + 8.0 * momenta[k + 1][l] -
                    8.0 * momenta[k - 1][l] + momenta[k - 2][l]) /
                   (12.0 * dt);
      residuals[k][l] = dq[l] - ddt;
    }
  }
  return residuals;
}

double max_interior_residual(const std::vector<Vec3>& residuals) {
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < residuals.size(); ++k)
    for (int l = 0; l < 3; ++l)
      worst = std::fmax(worst, std::fabs(residuals[k][l]));
  return worst;
}

Trajectory chetaev_full_solve(const State4& initial, const FieldSet& fs,
                              const ParticleSpec& spec, double horizon_s, double c,
                              const IntegratorSettings& settings) {
  if (spec.regime == Regime::Massless)
    throw Error(ErrorCode::MasslessRegime, "the full Chetaev solve requires M != 0");
  Trajectory traj;
  traj.regime = spec.regime;
  traj.c = c;
  traj.samples.reserve(settings.samples + 1);

  // State layout: q1..q4, qdot1..qdot4 (all four velocities free).
  std::array<double, 8> y{};
  for (int i = 0; i < 4; ++i) y[i] = initial.q[i];
  for (int l = 0; l < 3; ++l) y[4 + l] = initial.qdot[l];
  {
    FieldSample s0 = sample(fs, initial.q, c);
    y[7] = constraint_normal_form(s0, initial.qdot, c);
  }

  auto rhs = [&](double, const std::array<double, 8>& yv) {
    std::array<double, 4> q{yv[0], yv[1], yv[2], yv[3]};
    std::array<double, 4> qd{yv[4], yv[5], yv[6], yv[7]};
    FieldSample s = sample(fs, q, c);
    double h = constraint_normal_form(s, {qd[0], qd[1], qd[2]}, c);
    double lambda = chetaev_multiplier(s, qd, c);
    UnconstrainedCoeffs uc = unconstrained_coeffs(s, qd);
    std::array<double, 8> dy{};
    for (int sigma = 0; sigma < 4; ++sigma) dy[sigma] = qd[sigma];
    for (int l = 0; l < 3; ++l) dy[4 + l] = uc.A[l] + lambda * qd[l] / h;
    dy[7] = lambda - uc.A[3];
    return dy;
  };

  auto after_accept = [&](double, std::array<double, 8>& yv) {
    std::array<double, 4> q{yv[0], yv[1], yv[2], yv[3]};
    Vec3 qd3{yv[4], yv[5], yv[6]};
    FieldSample s = sample(fs, q, c);
    double g = yv[7] * yv[7] - norm2(qd3);
    double mc2 = s.mass_sq * c * c;
    double res = std::fabs(g - mc2) / (1.0 + std::fabs(mc2));
    if (res > traj.max_shadow_drift) traj.max_shadow_drift = res;
  };

  auto on_sample = [&](double sv, const std::array<double, 8>& yv) {
    std::array<double, 4> q{yv[0], yv[1], yv[2], yv[3]};
    Vec3 qd3{yv[4], yv[5], yv[6]};
    FieldSample s = sample(fs, q, c);
    double qd4 = yv[7];
    TrajectorySample out;
    out.s = sv;
    out.t = q[3] / c;
    out.r = {q[0], q[1], q[2]};
    out.v = (c / qd4) * qd3;
    out.qdot4 = qd4;
    out.mass = qd4 / c;
    out.energy = c * qd4;
    double g = qd4 * qd4 - norm2(qd3);
    double mc2 = s.mass_sq * c * c;
    out.constraint_residual = std::fabs(g - mc2) / (1.0 + std::fabs(mc2));
    traj.samples.push_back(out);
  };

  rk45_drive<8>(rhs, initial.s, y, initial.s + horizon_s, settings.samples,
                settings.step_controls(horizon_s), on_sample, after_accept);
  return traj;
}

CoefficientReport coefficient_oracle(const std::array<double, 4>& q, const Vec3& qdot3,
                                     const FieldSet& fs, double c) {
  CoefficientReport rep;
  FieldSample s = sample(fs, q, c);
  rep.closed = reduced_coeffs_closed(s, qdot3, c);
  rep.generic = reduced_coeffs_generic(0.0, q, qdot3,
                                       make_universal_lagrangian(fs, c),
                                       make_constraint_normal_form(fs, c));

  auto dev = [](double a, double b) {
    return std::fabs(a - b) / (1.0 + std::fmax(std::fabs(a), std::fabs(b)));
  };
  for (int l = 0; l < 3; ++l) {
    rep.max_rel_dev = std::fmax(rep.max_rel_dev, dev(rep.closed.Abar[l], rep.generic.Abar[l]));
    for (int j = 0; j < 3; ++j)
      rep.max_rel_dev =
          std::fmax(rep.max_rel_dev, dev(rep.closed.Bbar[l][j], rep.generic.Bbar[l][j]));
  }

  if (s.mass_sq != 0.0) {
    Mat3 inv = reduced_B_inverse(qdot3, s.mass_sq, c);
    rep.cond_bbar = frobenius_norm(rep.closed.Bbar) * frobenius_norm(inv);
  }
  return rep;
}

}  // namespace relsim
