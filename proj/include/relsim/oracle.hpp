#pragma once

#include <functional>
#include <vector>

#include "relsim/integrate.hpp"

namespace relsim {

// Independent brute-force validators. These share only the raw field
// expressions and pointwise Lagrangian evaluators with the closed-form code
// they check; every derivative here comes from finite differences.

// Pointwise Lagrangian of the unconstrained system built from plain-value
// field evaluation: L = -1/2 ((qdot4)^2 - sum qdot_p^2) + phi_sigma qdot^sigma - psi.
LagrangianFn4 make_universal_lagrangian(const FieldSet& fs, double c);

// Pointwise constraint normal form h = sqrt(M(q) c^2 + sum qdot_p^2).
ConstraintFn make_constraint_normal_form(const FieldSet& fs, double c);

// A time-parametrized Lagrangian for curves in R^3.
using LagrangianFn3 = std::function<double(double t, const Vec3& r, const Vec3& v)>;

// The standard charged-particle Lagrangian
//   L = -m0 c^2 sqrt(1 - v^2/c^2) + (e/c) A.v - e V
// with (A, V) reconstructed from the field set.
LagrangianFn3 make_charged_particle_lagrangian(const FieldSet& fs, double m0,
                                               double charge_e, double c);

// Euler-Lagrange residual dL/dq^l - d/dt dL/dv^l along a uniformly sampled
// trajectory. Spatial and velocity partials use central differences with
// step 1e-6 (1 + |x|); the time derivative uses a five-point stencil over
// the sample grid. Edge samples (two on each side) are reported as zero.
// Throws InsufficientSampling for fewer than five samples.
std::vector<Vec3> el_residual_3d(const LagrangianFn3& lagrangian,
                                 const Trajectory& traj);

double max_interior_residual(const std::vector<Vec3>& residuals);

// Integrate all four second-order Chetaev equations with the multiplier
// lambda; qdot4 propagates freely, so the recorded constraint residual
// measures how well lambda keeps the motion on the constraint.
Trajectory chetaev_full_solve(const State4& initial, const FieldSet& fs,
                              const ParticleSpec& spec, double horizon_s, double c,
                              const IntegratorSettings& settings = {});

// Closed-form reduced coefficients vs. the finite-difference generic
// reduction at one state.
struct CoefficientReport {
  ReducedCoeffs closed;
  ReducedCoeffs generic;
  double max_rel_dev = 0.0;  // bounded relative: |a-b| / (1 + max(|a|,|b|))
  double cond_bbar = 0.0;    // ||B|| ||B^-1|| (Frobenius)
};
CoefficientReport coefficient_oracle(const std::array<double, 4>& q, const Vec3& qdot3,
                                     const FieldSet& fs, double c);

}  // namespace relsim
