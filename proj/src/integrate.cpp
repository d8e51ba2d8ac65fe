#include "relsim/integrate.hpp"

#include <cmath>

namespace relsim {

namespace {

double shadow_residual(double shadow_qdot4, const Vec3& qdot3, double mass_sq,
                       double c) {
  double g = shadow_qdot4 * shadow_qdot4 - norm2(qdot3);
  double mc2 = mass_sq * c * c;
  return std::fabs(g - mc2) / (1.0 + std::fabs(mc2));
}

void fill_force_columns(TrajectorySample& out, const State3& st, const FieldSet& fs,
                        const ParticleSpec& spec, double c) {
  Motion3D mo = rhs_3d(st, fs, spec, c);
  out.f_lorentz = mo.forces.lorentz;
  out.f_constraint = mo.forces.constraint_induced;
  out.f_dicke = mo.forces.dicke;
}

}  // namespace

Trajectory integrate_4d(const State4& initial, const FieldSet& fs,
                        const ParticleSpec& spec, double horizon_s, double c,
                        const IntegratorSettings& settings) {
  if (spec.regime == Regime::Massless)
    throw Error(ErrorCode::MasslessRegime,
                "the s-parametrized reduced march requires M != 0");
  Trajectory traj;
  traj.regime = spec.regime;
  traj.c = c;
  traj.samples.reserve(settings.samples + 1);

  // State layout: q1..q4, qdot1..qdot3, shadow qdot4.
  std::array<double, 8> y{};
  for (int i = 0; i < 4; ++i) y[i] = initial.q[i];
  for (int l = 0; l < 3; ++l) y[4 + l] = initial.qdot[l];
  {
    FieldSample s0 = sample(fs, initial.q, c);
    y[7] = constraint_normal_form(s0, initial.qdot, c);
  }

  auto rhs = [&](double, const std::array<double, 8>& yv) {
    std::array<double, 4> q{yv[0], yv[1], yv[2], yv[3]};
    Vec3 qd{yv[4], yv[5], yv[6]};
    FieldSample s = sample(fs, q, c);
    double h = constraint_normal_form(s, qd, c);
    Vec3 acc = rhs_4d(s, qd, c);
    double lambda = chetaev_multiplier(s, qd, c);
    UnconstrainedCoeffs uc = unconstrained_coeffs(s, {qd[0], qd[1], qd[2], h});
    std::array<double, 8> dy{};
    dy[0] = qd[0];
    dy[1] = qd[1];
    dy[2] = qd[2];
    dy[3] = h;  // constraint enforced by construction
    dy[4] = acc[0];
    dy[5] = acc[1];
    dy[6] = acc[2];
    dy[7] = lambda - uc.A[3];  // free propagation of qdot4 (drift meter only)
    return dy;
  };

  auto after_accept = [&](double, std::array<double, 8>& yv) {
    std::array<double, 4> q{yv[0], yv[1], yv[2], yv[3]};
    Vec3 qd{yv[4], yv[5], yv[6]};
    FieldSample s = sample(fs, q, c);
    double res = shadow_residual(yv[7], qd, s.mass_sq, c);
    if (res > traj.max_shadow_drift) traj.max_shadow_drift = res;
  };

  auto on_sample = [&](double sv, const std::array<double, 8>& yv) {
    std::array<double, 4> q{yv[0], yv[1], yv[2], yv[3]};
    Vec3 qd{yv[4], yv[5], yv[6]};
    FieldSample s = sample(fs, q, c);
    double h = constraint_normal_form(s, qd, c);
    TrajectorySample out;
    out.s = sv;
    out.t = q[3] / c;
    out.r = {q[0], q[1], q[2]};
    out.v = (c / h) * qd;
    out.qdot4 = h;
    out.mass = h / c;
    out.energy = c * h;
    out.constraint_residual = shadow_residual(yv[7], qd, s.mass_sq, c);
    fill_force_columns(out, State3{out.t, out.r, out.v}, fs, spec, c);
    traj.samples.push_back(out);
  };

  rk45_drive<8>(rhs, initial.s, y, initial.s + horizon_s, settings.samples,
                settings.step_controls(horizon_s), on_sample, after_accept);
  return traj;
}

Trajectory integrate_3d(const State3& initial, const FieldSet& fs,
                        const ParticleSpec& spec, double horizon_t, double c,
                        const IntegratorSettings& settings, Formulation3D form) {
  if (spec.regime == Regime::Massless)
    throw Error(ErrorCode::MasslessRegime,
                "the massless march has its own equations of motion");
  Trajectory traj;
  traj.regime = spec.regime;
  traj.c = c;
  traj.samples.reserve(settings.samples + 1);

  // State layout: r1..r3, v1..v3, s.
  std::array<double, 7> y{initial.r[0], initial.r[1], initial.r[2],
                          initial.v[0], initial.v[1], initial.v[2], 0.0};

  auto mass_at = [&](const State3& st) {
    FieldSample s = sample_at(fs, st, c);
    double om = 1.0 - norm2(st.v) / (c * c);
    return std::sqrt(s.mass_sq / om);
  };

  auto rhs = [&](double t, const std::array<double, 7>& yv) {
    State3 st{t, {yv[0], yv[1], yv[2]}, {yv[3], yv[4], yv[5]}};
    Vec3 a;
    double m;
    if (form == Formulation3D::Psi) {
      Motion3D mo = rhs_3d(st, fs, spec, c, settings.light_barrier_eps);
      a = mo.dv_dt;
      m = mo.mass;
    } else {
      a = dicke_rhs_3d(st, fs, spec, c, settings.light_barrier_eps);
      m = mass_at(st);
    }
    std::array<double, 7> dy{};
    dy[0] = st.v[0];
    dy[1] = st.v[1];
    dy[2] = st.v[2];
    dy[3] = a[0];
    dy[4] = a[1];
    dy[5] = a[2];
    dy[6] = 1.0 / m;  // mass equation dt/ds = m
    return dy;
  };

  auto on_sample = [&](double t, const std::array<double, 7>& yv) {
    State3 st{t, {yv[0], yv[1], yv[2]}, {yv[3], yv[4], yv[5]}};
    Motion3D mo = rhs_3d(st, fs, spec, c, settings.light_barrier_eps);
    TrajectorySample out;
    out.s = yv[6];
    out.t = t;
    out.r = st.r;
    out.v = st.v;
    out.mass = mo.mass;
    out.energy = mo.mass * c * c;
    out.qdot4 = mo.mass * c;
    // Reconstructed four-velocity satisfies the constraint by construction;
    // the column documents the roundoff floor.
    double g = out.qdot4 * out.qdot4 - norm2(out.mass * st.v);
    FieldSample s = sample_at(fs, st, c);
    out.constraint_residual =
        std::fabs(g - s.mass_sq * c * c) / (1.0 + std::fabs(s.mass_sq) * c * c);
    out.f_lorentz = mo.forces.lorentz;
    out.f_constraint = mo.forces.constraint_induced;
    out.f_dicke = mo.forces.dicke;
    traj.samples.push_back(out);
  };

  auto after_accept = [](double, std::array<double, 7>&) {};

  rk45_drive<7>(rhs, initial.t, y, initial.t + horizon_t, settings.samples,
                settings.step_controls(horizon_t), on_sample, after_accept);
  return traj;
}

Trajectory integrate_massless(const MasslessState& initial, const FieldSet& fs,
                              const ParticleSpec& spec, double horizon_t, double c,
                              const IntegratorSettings& settings) {
  if (spec.regime != Regime::Massless)
    throw Error(ErrorCode::InvalidRegime, "massless march requires the massless regime");
  double n0 = norm(initial.e_v);
  if (std::fabs(n0 - 1.0) > 1e-9)
    throw Error(ErrorCode::NonUnitDirection,
                "initial direction must be unit, |e_v| = " + format_double(n0));

  Trajectory traj;
  traj.regime = spec.regime;
  traj.c = c;
  traj.samples.reserve(settings.samples + 1);

  auto energy_at = [&](double t, const Vec3& r) {
    std::array<double, 4> q{r[0], r[1], r[2], c * t};
    double e = spec.energy.value(q, c, fs.param_values);
    if (!(e > 0.0))
      throw Error(ErrorCode::NonPositiveEnergy,
                  "massless energy " + format_double(e) + " is not positive");
    return e;
  };

  // State layout: r1..r3, e_v1..e_v3, s.
  std::array<double, 7> y{initial.r[0], initial.r[1], initial.r[2],
                          initial.e_v[0], initial.e_v[1], initial.e_v[2], 0.0};

  auto rhs = [&](double t, const std::array<double, 7>& yv) {
    Vec3 r{yv[0], yv[1], yv[2]};
    Vec3 ev{yv[3], yv[4], yv[5]};
    double energy = energy_at(t, r);
    std::array<double, 4> q{r[0], r[1], r[2], c * t};
    FieldSample s = sample(fs, q, c);
    Vec3 dev = (c / energy) * massless_force(s, ev, c);
    std::array<double, 7> dy{};
    dy[0] = c * ev[0];
    dy[1] = c * ev[1];
    dy[2] = c * ev[2];
    dy[3] = dev[0];
    dy[4] = dev[1];
    dy[5] = dev[2];
    dy[6] = c * c / energy;  // energy equation c^2 dt/ds = E
    return dy;
  };

  auto after_accept = [&](double t, std::array<double, 7>& yv) {
    Vec3 r{yv[0], yv[1], yv[2]};
    Vec3 ev{yv[3], yv[4], yv[5]};
    double n = norm(ev);
    double drift = std::fabs(n - 1.0);
    if (drift > traj.max_unit_norm_drift) traj.max_unit_norm_drift = drift;
    ev = ev / n;
    yv[3] = ev[0];
    yv[4] = ev[1];
    yv[5] = ev[2];

    std::array<double, 4> q{r[0], r[1], r[2], c * t};
    FieldSample s = sample(fs, q, c);
    Vec3 f = massless_force(s, ev, c);
    Vec3 grad_psi{s.dpsi[0], s.dpsi[1], s.dpsi[2]};
    double proj = std::fabs(dot(f, ev));
    if (proj > traj.max_force_dot_ev) traj.max_force_dot_ev = proj;

    double res_force = std::fabs(dot(f, grad_psi));
    double res_dpsi = std::fabs(c * dot(ev, grad_psi) + c * s.dpsi[3]);
    if (res_force > traj.max_compat_force) traj.max_compat_force = res_force;
    if (res_dpsi > traj.max_compat_dpsi) traj.max_compat_dpsi = res_dpsi;
    double scale_force = (1.0 + norm(f)) * (1.0 + norm(grad_psi));
    double scale_dpsi = c * (1.0 + norm(grad_psi) + std::fabs(s.dpsi[3]));
    if (res_force > settings.compat_tol * scale_force ||
        res_dpsi > settings.compat_tol * scale_dpsi)
      throw Error(ErrorCode::IncompatibleFields,
                  "massless motion incompatible with the scalar field: |F.grad psi| = " +
                      format_double(res_force) + ", |dpsi/dt| = " +
                      format_double(res_dpsi));
  };

  auto on_sample = [&](double t, const std::array<double, 7>& yv) {
    Vec3 r{yv[0], yv[1], yv[2]};
    Vec3 ev{yv[3], yv[4], yv[5]};
    double energy = energy_at(t, r);
    std::array<double, 4> q{r[0], r[1], r[2], c * t};
    FieldSample s = sample(fs, q, c);
    TrajectorySample out;
    out.s = yv[6];
    out.t = t;
    out.r = r;
    out.v = c * ev;
    out.qdot4 = energy / c;
    out.mass = energy / (c * c);
    out.energy = energy;
    double q4 = energy / c;
    out.constraint_residual = std::fabs(q4 * q4 * (1.0 - norm2(ev)));
    out.f_lorentz = massless_force(s, ev, c);
    traj.samples.push_back(out);
  };

  rk45_drive<7>(rhs, initial.t, y, initial.t + horizon_t, settings.samples,
                settings.step_controls(horizon_t), on_sample, after_accept);
  return traj;
}

double ds_dt_mass_residual(const Trajectory& traj) {
  double worst = 0.0;
  const auto& ss = traj.samples;
  for (std::size_t k = 0; k + 2 < ss.size(); k += 2) {
    double dt = ss[k + 2].t - ss[k].t;
    if (dt <= 0.0) continue;
    double ds = ss[k + 2].s - ss[k].s;
    double simpson = dt / 6.0 *
                     (1.0 / ss[k].mass + 4.0 / ss[k + 1].mass + 1.0 / ss[k + 2].mass);
    double res = std::fabs(ds - simpson) / dt * ss[k + 1].mass;
    if (res > worst) worst = res;
  }
  return worst;
}

}  // namespace relsim
