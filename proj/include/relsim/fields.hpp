#pragma once

#include <array>
#include <string>
#include <vector>

#include "relsim/expr.hpp"
#include "relsim/vec.hpp"

namespace relsim {

// The admissible fields of the model: a covariant four-potential phi_sigma,
// a scalar potential psi, and the mass-squared function M, all expressions
// over space-time. The electromagnetic convention phi_l = (e/c) A_l,
// phi_4 = -(e/c) V is applied by the 3D accessors; psi is stored with the
// scalar charge already folded in.
struct FieldSet {
  std::array<Expr, 4> phi{};
  Expr psi{};
  Expr mass_sq{};
  std::vector<std::string> param_names;
  std::vector<double> param_values;

  static FieldSet free_fields(double mass_sq_value) {
    FieldSet fs;
    fs.mass_sq = Expr::literal(mass_sq_value);
    return fs;
  }
};

// Values and exact first partials of every field at one space-time point.
// dphi[sigma][nu] = d phi_sigma / d q^nu.
struct FieldSample {
  std::array<double, 4> phi{};
  double dphi[4][4] = {};
  double psi = 0.0;
  std::array<double, 4> dpsi{};
  double mass_sq = 0.0;
  std::array<double, 4> dmass{};
};

FieldSample sample(const FieldSet& fs, const std::array<double, 4>& q, double c);

// F[sigma][nu] = d phi_sigma / d q^nu - d phi_nu / d q^sigma; antisymmetric.
Mat4 faraday(const FieldSample& s);

struct EmDecomposition {
  Vec3 vector_potential{};  // A
  Vec3 rot_a{};             // rot A
  Vec3 da_dt{};             // dA/dt at fixed position
  Vec3 grad_v{};            // grad V
  double scalar_potential = 0.0;  // V
};

// Recover (A, V) from phi and differentiate in adapted coordinates
// (d/dt = c d/dq4). Throws ChargeZero when e == 0 since the reconstruction
// divides by the charge.
EmDecomposition em_3d(const FieldSet& fs, double t, const Vec3& r, double charge_e,
                      double c);

// Lorentz force in terms of phi directly (no division by the charge):
// F_j = v^l (dphi_l/dq^j - dphi_j/dq^l) + c (dphi_4/dq^j - dphi_j/dq^4).
// Equals e ((1/c) v x rot A - (1/c) dA/dt - grad V).
Vec3 lorentz_force(const FieldSample& s, const Vec3& v, double c);

}  // namespace relsim
