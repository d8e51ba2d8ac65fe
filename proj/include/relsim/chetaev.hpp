#pragma once

#include <array>
#include <functional>

#include "relsim/fields.hpp"
#include "relsim/minkowski.hpp"
#include "relsim/particle.hpp"
#include "relsim/vec.hpp"

namespace relsim {

// Guard half-width around the light barrier |1 - v^2/c^2| = 0; the
// instantaneous mass diverges there and integration must stop.
inline constexpr double kLightBarrierEps = 1e-10;

// State on the constraint manifold in fibred coordinates: the three spatial
// velocities are free, qdot4 follows from the normal form.
struct State4 {
  double s = 0.0;
  std::array<double, 4> q{};
  Vec3 qdot{};
};

// State in adapted coordinates for a three-dimensional observer.
struct State3 {
  double t = 0.0;
  Vec3 r{};
  Vec3 v{};
};

FieldSample sample_at(const FieldSet& fs, const State3& st, double c);

// Coefficients A_sigma of the unconstrained Euler-Lagrange system
// A_sigma + B_sigma_nu qddot^nu = 0 for the universal Lagrangian
//   L = -1/2 g(u, u) + phi_sigma qdot^sigma - psi.
// B is the constant matrix diag(-1, -1, -1, +1), returned separately.
struct UnconstrainedCoeffs {
  std::array<double, 4> A{};
};
UnconstrainedCoeffs unconstrained_coeffs(const FieldSample& s,
                                         const std::array<double, 4>& qdot);
inline constexpr std::array<double, 4> kMetricDiagB = {-1.0, -1.0, -1.0, 1.0};

// Normal form of the constraint on the qdot4 > 0 branch:
// h = sqrt(M c^2 + sum qdot_p^2). Throws OutsideConstraintDomain when the
// radicand is not positive.
double constraint_normal_form(const FieldSample& s, const Vec3& qdot3, double c);

// Reduced coefficients of the three equations Abar_l + Bbar_ls qddot^s = 0
// on the constraint, together with the partials of h used to build them.
struct ReducedCoeffs {
  Vec3 Abar{};
  Mat3 Bbar{};
  double h = 0.0;
  Vec3 dh_dqdot{};
  std::array<double, 4> dh_dq{};
  double dh_ds = 0.0;
};

// Closed-form reduction for the universal Lagrangian; exact derivatives from
// the field sample. Valid for position-dependent M (the dM/ds flow term is
// included; it vanishes for constant M).
ReducedCoeffs reduced_coeffs_closed(const FieldSample& s, const Vec3& qdot3, double c);

// Generic reduction from arbitrary evaluators, all derivatives taken by
// central finite differences of the raw callables (step 1e-6 * (1 + |x|)).
// Serves as the independent oracle for the closed form.
using LagrangianFn4 = std::function<double(double s, const std::array<double, 4>& q,
                                           const std::array<double, 4>& qdot)>;
using ConstraintFn = std::function<double(double s, const std::array<double, 4>& q,
                                          const Vec3& qdot3)>;
ReducedCoeffs reduced_coeffs_generic(double s, const std::array<double, 4>& q,
                                     const Vec3& qdot3, const LagrangianFn4& L,
                                     const ConstraintFn& h);

// Closed-form inverse of Bbar: -(1/(M c^2)) (M c^2 I + qdot qdot^T).
Mat3 reduced_B_inverse(const Vec3& qdot3, double mass_sq, double c);

// Accelerations qddot^j of the reduced system in fibred coordinates.
// Requires M != 0 (MasslessRegime otherwise) and the constraint-domain
// condition M c^2 + sum qdot_p^2 > 0.
Vec3 rhs_4d(const FieldSample& s, const Vec3& qdot3, double c);

// Chetaev multiplier lambda = (h / (M c^2)) d/ds (1/2 M c^2 - psi) with the
// flow derivative expanded along the given four-velocity.
double chetaev_multiplier(const FieldSample& s, const std::array<double, 4>& qdot,
                          double c);
// On-constraint variant: qdot4 is set to h(q, qdot3).
double chetaev_multiplier(const FieldSample& s, const Vec3& qdot3, double c);

// The momentum balance reads d/dt (m v) = F_L + F_C + scalar gradient term.
// F_C carries the full flow derivative d/dt (psi - 1/2 M c^2), so for
// position-dependent M no further mass-flow force appears; `mass_flow` is
// reported separately as the -1/2 v dM/dt bookkeeping term that splits off
// F_C when the equation is written against a constant-M reference form.
struct ForceBreakdown {
  Vec3 lorentz{};            // F_L
  Vec3 constraint_induced{}; // F_C
  Vec3 scalar_gradient{};    // -sqrt((1-v^2/c^2)/M) grad psi
  Vec3 dicke{};              // F_D (informational; not part of the sum)
  Vec3 mass_flow{};          // informational; already contained in F_C

  Vec3 total() const {
    return lorentz + constraint_induced + scalar_gradient;
  }
};

struct Motion3D {
  Vec3 dv_dt{};
  ForceBreakdown forces{};
  double mass = 0.0;       // instantaneous mass m = sqrt(M / (1 - v^2/c^2))
  double dpsi_dt = 0.0;
  double dmass_sq_dt = 0.0;
};

// Momentum-balance form for a three-dimensional observer:
// d/dt (m v) = F_L + F_C - sqrt((1-v^2/c^2)/M) grad psi - mass-flow term,
// solved for dv/dt. Branch signs follow from the positive root of
// (1-v^2/c^2)/M, which is real in the domain of every regime.
Motion3D rhs_3d(const State3& st, const FieldSet& fs, const ParticleSpec& spec,
                double c, double light_barrier_eps = kLightBarrierEps);

Vec3 induced_constraint_force(const State3& st, const FieldSet& fs,
                              const ParticleSpec& spec, double c);

// Effective-mass reformulation: psi absorbed into m~0 = m0 exp(+-psi/(m0^2 c^2)).
struct DickeQuantities {
  double m_tilde0 = 0.0;
  Vec3 force{};            // F_D
  double em_prefactor = 1.0;  // exp(mu) = m~0 / m0
};
DickeQuantities dicke_transform(const FieldSet& fs, const ParticleSpec& spec,
                                const State3& st, double c);

// dv/dt obtained from the effective-mass form of the equations of motion;
// must reproduce rhs_3d trajectories for constant-M regimes.
Vec3 dicke_rhs_3d(const State3& st, const FieldSet& fs, const ParticleSpec& spec,
                  double c, double light_barrier_eps = kLightBarrierEps);

// Projected electromagnetic force on a massless particle; orthogonal to e_v
// by construction.
Vec3 massless_force(const FieldSample& s, const Vec3& e_v, double c);

// d e_v / dt = (c / E) F. Direction must be unit within 1e-9; E > 0.
Vec3 massless_rhs(double t, const Vec3& r, const Vec3& e_v, const FieldSet& fs,
                  double energy, double c);

// Residual pair (|F . grad psi|, |d psi / dt|); both vanish iff massless
// motion is allowed in the given fields.
struct CompatibilityResidual {
  double force_dot_grad_psi = 0.0;
  double dpsi_dt = 0.0;
};
CompatibilityResidual fields_compatibility(double t, const Vec3& r, const Vec3& e_v,
                                           const FieldSet& fs, double c);

// Instantaneous mass, energy, and qdot4 = E/c from either the momentum
// magnitude or the speed.
struct MassEnergy {
  double mass = 0.0;
  double energy = 0.0;
  double qdot4 = 0.0;
};
struct MomentumMagnitude { double p = 0.0; };
struct SpeedMagnitude { double v = 0.0; };
MassEnergy energy_mass_relations(const ParticleSpec& spec, MomentumMagnitude pm,
                                 double c);
MassEnergy energy_mass_relations(const ParticleSpec& spec, SpeedMagnitude vm,
                                 double c);

}  // namespace relsim
