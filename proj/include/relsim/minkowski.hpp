#pragma once

#include <array>

#include "relsim/error.hpp"
#include "relsim/vec.hpp"

namespace relsim {

// Component ordering is (q1, q2, q3, q4) with index 3 the time-like
// coordinate. The metric signature is diag(-1, -1, -1, +1) throughout:
// g(u, w) = u4 w4 - sum_p u^p w^p.

struct FourVector {
  double v[4] = {0.0, 0.0, 0.0, 0.0};

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  // Checked constructor; rejects NaN/Inf components.
  static FourVector of(double a, double b, double c, double d);

  Vec3 spatial() const { return {v[0], v[1], v[2]}; }
  double time() const { return v[3]; }
};

// Covariant four-momentum p_sigma = g_{sigma nu} u^nu.
struct FourMomentum {
  double cov[4] = {0.0, 0.0, 0.0, 0.0};  // (p1, p2, p3, p4) lower indices

  double operator[](int i) const { return cov[i]; }

  // Raise the index back: p^sigma = (-p_1, -p_2, -p_3, p_4).
  FourVector contravariant() const;

  // Components in adapted coordinates (q^l, t): p = p_l dq^l + p_t dt,
  // so p_t = c * p_4.
  Vec3 spatial_lower() const { return {cov[0], cov[1], cov[2]}; }
  double time_component(double c) const { return c * cov[3]; }
};

// g(u, w) with signature (-,-,-,+). Symmetric and bilinear.
double metric_contract(const FourVector& u, const FourVector& w);

// Index lowering: p_sigma = (-u1, -u2, -u3, u4). The contraction identity
// p_sigma u^sigma = g(u, u) holds exactly by construction.
FourMomentum lower(const FourVector& u);

// g(u, u) - M c^2; vanishes exactly on the constraint submanifold.
double constraint_residual(const FourVector& u, double mass_sq, double c);

struct Split3D {
  double t = 0.0;
  Vec3 r{};
  Vec3 v{};
  double qdot4 = 0.0;
};

// Transform a four-dimensional state (q, qdot) to adapted coordinates:
// t = q4/c, v^l = c qdot^l / qdot4. Throws DegenerateVelocity when qdot4
// sits on the excluded hyperplane (|qdot4| below tolerance).
Split3D split_3d(const FourVector& q, const FourVector& qdot, double c);

// Exact algebraic inverse of split_3d.
void unsplit_3d(const Split3D& st, double c, FourVector& q_out, FourVector& qdot_out);

// The space-time metric with its run-level speed of light. The signature is
// fixed; c only enters the constraint right-hand side M c^2 and the adapted
// coordinate transforms.
struct Metric {
  double c = 1.0;

  double contract(const FourVector& u, const FourVector& w) const {
    return metric_contract(u, w);
  }
  double residual(const FourVector& u, double mass_sq) const {
    return constraint_residual(u, mass_sq, c);
  }
  Split3D split(const FourVector& q, const FourVector& qdot) const {
    return split_3d(q, qdot, c);
  }
};

inline constexpr double kDegenerateVelocityTol = 1e-12;

}  // namespace relsim
