#pragma once

#include <vector>

#include "relsim/chetaev.hpp"
#include "relsim/rk45.hpp"

namespace relsim {

struct IntegratorSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0: horizon / 1000
  double fixed_step = 0.0;    // > 0: uniform steps, no error control
  int samples = 400;          // output grid points past the initial one
  long max_steps = 2'000'000;
  double light_barrier_eps = kLightBarrierEps;
  double compat_tol = 1e-6;   // massless fields-compatibility abort threshold

  StepControls step_controls(double horizon) const {
    StepControls ctl;
    ctl.rel_tol = rel_tol;
    ctl.abs_tol = abs_tol;
    ctl.initial_step = initial_step > 0.0 ? initial_step : horizon / 1000.0;
    ctl.fixed_step = fixed_step;
    ctl.max_steps = max_steps;
    return ctl;
  }
};

struct TrajectorySample {
  double s = 0.0;
  double t = 0.0;
  Vec3 r{};
  Vec3 v{};
  double qdot4 = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double constraint_residual = 0.0;
  Vec3 f_lorentz{};
  Vec3 f_constraint{};
  Vec3 f_dicke{};
};

struct Trajectory {
  Regime regime = Regime::Massive;
  double c = 1.0;
  std::vector<TrajectorySample> samples;

  // Method-error diagnostics accumulated over accepted steps.
  double max_shadow_drift = 0.0;      // 4D runs: freely propagated qdot4
  double max_unit_norm_drift = 0.0;   // massless: |e_v| before renormalization
  double max_force_dot_ev = 0.0;      // massless: projector residual
  double max_compat_force = 0.0;      // massless: |F . grad psi|
  double max_compat_dpsi = 0.0;       // massless: |d psi / dt|
};

// March the reduced system in the affine parameter s. qdot4 is recomputed
// from the constraint normal form at every evaluation; a shadow copy is
// propagated freely through the fourth Chetaev equation purely to measure
// constraint drift of the method.
Trajectory integrate_4d(const State4& initial, const FieldSet& fs,
                        const ParticleSpec& spec, double horizon_s, double c,
                        const IntegratorSettings& settings = {});

enum class Formulation3D { Psi, DickeMass };

// March in observer time t; co-integrates ds/dt = 1/m to reconstruct the
// affine parameter.
Trajectory integrate_3d(const State3& initial, const FieldSet& fs,
                        const ParticleSpec& spec, double horizon_t, double c,
                        const IntegratorSettings& settings = {},
                        Formulation3D form = Formulation3D::Psi);

struct MasslessState {
  double t = 0.0;
  Vec3 r{};
  Vec3 e_v{};  // unit direction of motion
};

// Massless march: d e_v/dt = (c/E) F, dr/dt = c e_v, ds/dt = c^2/E. The
// direction is renormalized after each accepted step and the fields
// compatibility residuals abort the run when violated.
Trajectory integrate_massless(const MasslessState& initial, const FieldSet& fs,
                              const ParticleSpec& spec, double horizon_t, double c,
                              const IntegratorSettings& settings = {});

// Max over sample triples of |mean ds/dt * m - 1| with Simpson quadrature of
// 1/m; checks the mass equation dt/ds = m along a 3D trajectory.
double ds_dt_mass_residual(const Trajectory& traj);

}  // namespace relsim
