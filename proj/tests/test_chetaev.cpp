#include <cmath>
#include <random>

#include "doctest.h"
#include "relsim/chetaev.hpp"
#include "relsim/oracle.hpp"
#include "support.hpp"

using namespace relsim;

namespace {

// Finite-difference oracle for the unconstrained coefficients, built directly
// from a pointwise Lagrangian (independent of the closed forms).
std::array<double, 4> fd_unconstrained_A(const LagrangianFn4& L,
                                         const std::array<double, 4>& q,
                                         const std::array<double, 4>& qdot) {
  auto at = [&](const std::array<double, 4>& qq, const std::array<double, 4>& qd) {
    return L(0.0, qq, qd);
  };
  std::array<double, 4> A{};
  for (int sigma = 0; sigma < 4; ++sigma) {
    double dq = 1e-6 * (1.0 + std::fabs(q[sigma]));
    std::array<double, 4> hi = q, lo = q;
    hi[sigma] += dq;
    lo[sigma] -= dq;
    double dL_dq = (at(hi, qdot) - at(lo, qdot)) / (2.0 * dq);

    double mixed = 0.0;
    for (int nu = 0; nu < 4; ++nu) {
      double dn = 1e-4 * (1.0 + std::fabs(q[nu]));
      double dv = 1e-4 * (1.0 + std::fabs(qdot[sigma]));
      std::array<double, 4> qpp = q, qmm = q;
      std::array<double, 4> vp = qdot, vm = qdot;
      qpp[nu] += dn;
      qmm[nu] -= dn;
      vp[sigma] += dv;
      vm[sigma] -= dv;
      double d2 = (at(qpp, vp) - at(qpp, vm) - at(qmm, vp) + at(qmm, vm)) /
                  (4.0 * dn * dv);
      mixed += d2 * qdot[nu];
    }
    A[sigma] = dL_dq - mixed;  // L has no explicit s dependence
  }
  return A;
}

}  // namespace

TEST_CASE("unconstrained coefficients: closed cases") {
  FieldSet zero = FieldSet::free_fields(1.0);
  FieldSample s = sample(zero, {0, 0, 0, 0}, 1.0);
  UnconstrainedCoeffs uc = unconstrained_coeffs(s, {0.3, -0.2, 0.1, 1.1});
  for (int sigma = 0; sigma < 4; ++sigma) CHECK(uc.A[sigma] == 0.0);

  FieldSet lin = testsupport::linear_psi_field(2.0, 1.0);
  s = sample(lin, {0.5, 0, 0, 0.2}, 1.0);
  uc = unconstrained_coeffs(s, {0.7, -0.4, 0.0, 1.3});
  CHECK(uc.A[0] == -2.0);
  CHECK(uc.A[1] == 0.0);
  CHECK(uc.A[2] == 0.0);
  CHECK(uc.A[3] == 0.0);
}

TEST_CASE("unconstrained coefficients match the finite-difference Lagrangian route") {
  std::mt19937 rng(2024);
  int cases = 0;
  while (cases < 60) {
    FieldSet fs = testsupport::random_field_set(rng);
    std::array<double, 4> q = testsupport::random_point(rng);
    std::array<double, 4> qdot{testsupport::uniform(rng, -1, 1),
                               testsupport::uniform(rng, -1, 1),
                               testsupport::uniform(rng, -1, 1),
                               testsupport::uniform(rng, 0.3, 1.5)};
    FieldSample s;
    try {
      s = sample(fs, q, 1.0);
    } catch (const Error&) {
      continue;
    }
    UnconstrainedCoeffs uc = unconstrained_coeffs(s, qdot);
    std::array<double, 4> fd =
        fd_unconstrained_A(make_universal_lagrangian(fs, 1.0), q, qdot);
    for (int sigma = 0; sigma < 4; ++sigma)
      CHECK(std::fabs(uc.A[sigma] - fd[sigma]) / (1.0 + std::fabs(uc.A[sigma])) < 1e-6);
    ++cases;
  }
}

TEST_CASE("closed-form reduced coefficients: landmark values") {
  FieldSet zero = FieldSet::free_fields(1.0);
  FieldSample s = sample(zero, {0, 0, 0, 0}, 1.0);
  ReducedCoeffs rc = reduced_coeffs_closed(s, {0, 0, 0}, 1.0);
  CHECK(rc.h == 1.0);
  for (int l = 0; l < 3; ++l) {
    CHECK(rc.Abar[l] == 0.0);
    for (int j = 0; j < 3; ++j) CHECK(rc.Bbar[l][j] == (l == j ? -1.0 : 0.0));
  }

  // M = 0: Bbar becomes singular (the reduced system has no normal form).
  FieldSet null_mass = FieldSet::free_fields(0.0);
  s = sample(null_mass, {0, 0, 0, 0}, 1.0);
  rc = reduced_coeffs_closed(s, {1, 0, 0}, 1.0);
  CHECK(rc.Bbar[0][0] == doctest::Approx(0.0));
  double det =
      rc.Bbar[0][0] * (rc.Bbar[1][1] * rc.Bbar[2][2] - rc.Bbar[1][2] * rc.Bbar[2][1]) -
      rc.Bbar[0][1] * (rc.Bbar[1][0] * rc.Bbar[2][2] - rc.Bbar[1][2] * rc.Bbar[2][0]) +
      rc.Bbar[0][2] * (rc.Bbar[1][0] * rc.Bbar[2][1] - rc.Bbar[1][1] * rc.Bbar[2][0]);
  CHECK(std::fabs(det) < 1e-15);

  // outside the constraint domain
  FieldSet tach = FieldSet::free_fields(-1.0);
  s = sample(tach, {0, 0, 0, 0}, 1.0);
  CHECK_THROWS_AS(reduced_coeffs_closed(s, {0.1, 0, 0}, 1.0), Error);
}

TEST_CASE("closed and generic reductions agree on random states") {
  std::mt19937 rng(31415);
  int cases = 0;
  while (cases < 120) {
    FieldSet fs = testsupport::random_field_set(rng);
    std::array<double, 4> q = testsupport::random_point(rng);
    double mass_sq = fs.mass_sq.value(q, 1.0, fs.param_values);
    if (std::fabs(mass_sq) < 0.1) continue;
    Vec3 qd = testsupport::random_qdot3_in_domain(rng, fs, q, 1.0);
    FieldSample s;
    ReducedCoeffs closed;
    try {
      s = sample(fs, q, 1.0);
      closed = reduced_coeffs_closed(s, qd, 1.0);
    } catch (const Error&) {
      continue;
    }
    ReducedCoeffs generic =
        reduced_coeffs_generic(0.0, q, qd, make_universal_lagrangian(fs, 1.0),
                               make_constraint_normal_form(fs, 1.0));
    for (int l = 0; l < 3; ++l) {
      CHECK(std::fabs(closed.Abar[l] - generic.Abar[l]) /
                (1.0 + std::fabs(closed.Abar[l])) <
            1e-6);
      for (int j = 0; j < 3; ++j)
        CHECK(std::fabs(closed.Bbar[l][j] - generic.Bbar[l][j]) /
                  (1.0 + std::fabs(closed.Bbar[l][j])) <
              1e-6);
    }
    for (int l = 0; l < 3; ++l)
      for (int j = 0; j < 3; ++j) CHECK(closed.Bbar[l][j] == closed.Bbar[j][l]);
    ++cases;
  }
}

TEST_CASE("closed-form inverse of Bbar") {
  std::mt19937 rng(8);
  for (int it = 0; it < 200; ++it) {
    double mass_sq = testsupport::uniform(rng, 0.2, 2.0);
    if (testsupport::pick(rng, 2) == 0) mass_sq = -mass_sq;
    double c = testsupport::uniform(rng, 0.5, 2.0);
    Vec3 qd{testsupport::uniform(rng, -1, 1), testsupport::uniform(rng, -1, 1),
            testsupport::uniform(rng, -1, 1)};
    if (mass_sq * c * c + norm2(qd) <= 0.05) continue;

    FieldSet fs = FieldSet::free_fields(mass_sq);
    FieldSample s = sample(fs, {0, 0, 0, 0}, c);
    ReducedCoeffs rc = reduced_coeffs_closed(s, qd, c);
    Mat3 inv = reduced_B_inverse(qd, mass_sq, c);
    Mat3 prod = matmul(rc.Bbar, inv);
    for (int l = 0; l < 3; ++l)
      for (int j = 0; j < 3; ++j)
        CHECK(std::fabs(prod[l][j] - (l == j ? 1.0 : 0.0)) < 1e-10);
  }
}

TEST_CASE("reduced accelerations: landmark values and the matrix route") {
  FieldSet zero = FieldSet::free_fields(1.0);
  FieldSample s = sample(zero, {0, 0, 0, 0}, 1.0);
  Vec3 acc = rhs_4d(s, {0.4, -0.1, 0.2}, 1.0);
  CHECK(norm(acc) == 0.0);

  double k = 1.9, m0 = 1.3;
  FieldSet lin = testsupport::linear_psi_field(k, m0 * m0);
  s = sample(lin, {0, 0, 0, 0}, 1.0);
  acc = rhs_4d(s, {0, 0, 0}, 1.0);
  CHECK(acc[0] == doctest::Approx(-k).epsilon(1e-14));
  CHECK(acc[1] == 0.0);
  CHECK(acc[2] == 0.0);

  FieldSet null_mass = FieldSet::free_fields(0.0);
  s = sample(null_mass, {0, 0, 0, 0}, 1.0);
  CHECK_THROWS_AS(rhs_4d(s, {1, 0, 0}, 1.0), Error);

  // -Bbar^-1 Abar equals the explicit force formula
  std::mt19937 rng(606);
  int cases = 0;
  while (cases < 100) {
    FieldSet fs = testsupport::random_field_set(rng);
    std::array<double, 4> q = testsupport::random_point(rng);
    double mass_sq = fs.mass_sq.value(q, 1.0, fs.param_values);
    if (std::fabs(mass_sq) < 0.1) continue;
    Vec3 qd = testsupport::random_qdot3_in_domain(rng, fs, q, 1.0);
    FieldSample sf;
    ReducedCoeffs rc;
    Vec3 direct;
    try {
      sf = sample(fs, q, 1.0);
      rc = reduced_coeffs_closed(sf, qd, 1.0);
      direct = rhs_4d(sf, qd, 1.0);
    } catch (const Error&) {
      continue;
    }
    Mat3 inv = reduced_B_inverse(qd, mass_sq, 1.0);
    Vec3 via_matrix = -1.0 * matvec(inv, rc.Abar);
    for (int l = 0; l < 3; ++l)
      CHECK(std::fabs(direct[l] - via_matrix[l]) / (1.0 + std::fabs(direct[l])) < 1e-10);
    ++cases;
  }
}

TEST_CASE("Chetaev multiplier: closed cases") {
  FieldSet zero = FieldSet::free_fields(1.3);
  FieldSample s = sample(zero, {0, 0, 0, 0}, 1.0);
  CHECK(chetaev_multiplier(s, Vec3{0.4, 0.2, -0.7}, 1.0) == 0.0);

  double k = 0.8, u = 0.6, mass_sq = 1.21, c = 1.0;
  FieldSet lin = testsupport::linear_psi_field(k, mass_sq);
  s = sample(lin, {0, 0, 0, 0}, c);
  double lambda = chetaev_multiplier(s, Vec3{u, 0, 0}, c);
  double expected = -std::sqrt(mass_sq * c * c + u * u) / (mass_sq * c * c) * k * u;
  CHECK(lambda == doctest::Approx(expected).epsilon(1e-14));

  FieldSet null_mass = FieldSet::free_fields(0.0);
  s = sample(null_mass, {0, 0, 0, 0}, 1.0);
  CHECK_THROWS_AS(chetaev_multiplier(s, Vec3{1, 0, 0}, 1.0), Error);
}

TEST_CASE("Chetaev equations close with the reduced accelerations and lambda") {
  std::mt19937 rng(2718);
  int cases = 0;
  while (cases < 150) {
    FieldSet fs = testsupport::random_field_set(rng);
    std::array<double, 4> q = testsupport::random_point(rng);
    double mass_sq = fs.mass_sq.value(q, 1.0, fs.param_values);
    if (std::fabs(mass_sq) < 0.1) continue;
    Vec3 qd = testsupport::random_qdot3_in_domain(rng, fs, q, 1.0);
    FieldSample s;
    Vec3 acc;
    try {
      s = sample(fs, q, 1.0);
      acc = rhs_4d(s, qd, 1.0);
    } catch (const Error&) {
      continue;
    }
    double h = constraint_normal_form(s, qd, 1.0);
    double lambda = chetaev_multiplier(s, qd, 1.0);
    UnconstrainedCoeffs uc = unconstrained_coeffs(s, {qd[0], qd[1], qd[2], h});

    // qddot4 from the differentiated constraint
    double dmass_flow = h * s.dmass[3];
    for (int l = 0; l < 3; ++l) dmass_flow += qd[l] * s.dmass[l];
    double qddot4 = (0.5 * dmass_flow + dot(acc, qd)) / h;

    // the four Chetaev equations
    for (int l = 0; l < 3; ++l)
      CHECK(std::fabs(-acc[l] + uc.A[l] + lambda * qd[l] / h) < 1e-9);
    CHECK(std::fabs(qddot4 + uc.A[3] - lambda) < 1e-9);

    // d/ds (1/2 M c^2 - psi) = lambda M c^2 / h along the flow
    double flow = 0.0;
    std::array<double, 4> qdot4{qd[0], qd[1], qd[2], h};
    for (int sigma = 0; sigma < 4; ++sigma)
      flow += qdot4[sigma] * (0.5 * s.dmass[sigma] - s.dpsi[sigma]);
    CHECK(std::fabs(flow - lambda * mass_sq / h) < 1e-9);
    ++cases;
  }
}

TEST_CASE("induced constraint force") {
  double c = 1.0;
  ParticleSpec sp = ParticleSpec::massive(1.4);
  FieldSet lin = testsupport::linear_psi_field(0.9, sp.m0 * sp.m0);

  // vanishes at rest
  Vec3 fc = induced_constraint_force(State3{0, {0, 0, 0}, {0, 0, 0}}, lin, sp, c);
  CHECK(norm(fc) == 0.0);

  // vanishes when psi is constant along the motion
  fc = induced_constraint_force(State3{0, {0, 0, 0}, {0, 0.5, 0}}, lin, sp, c);
  CHECK(std::fabs(fc[0]) < 1e-15);
  CHECK(std::fabs(fc[1]) < 1e-15);

  // closed form for motion along the gradient
  double k = 0.9, u = 0.5, m0 = 1.4;
  fc = induced_constraint_force(State3{0, {0, 0, 0}, {u, 0, 0}}, lin, sp, c);
  double expected = -k * u * u / (m0 * c * c) / std::sqrt(1.0 - u * u / (c * c));
  CHECK(fc[0] == doctest::Approx(expected).epsilon(1e-13));

  // tachyon branch flips the sign
  ParticleSpec tp = ParticleSpec::tachyon(1.4);
  FieldSet tlin = testsupport::linear_psi_field(0.9, -m0 * m0);
  double w = 1.5;
  fc = induced_constraint_force(State3{0, {0, 0, 0}, {w, 0, 0}}, tlin, tp, c);
  double texpected = k * w * w / (m0 * c * c) / std::sqrt(w * w / (c * c) - 1.0);
  CHECK(fc[0] == doctest::Approx(texpected).epsilon(1e-13));

  ParticleSpec ml = ParticleSpec::massless();
  FieldSet null_mass = FieldSet::free_fields(0.0);
  CHECK_THROWS_AS(
      induced_constraint_force(State3{0, {0, 0, 0}, {1, 0, 0}}, null_mass, ml, c),
      Error);
}

TEST_CASE("3D equations of motion: landmark values") {
  double c = 1.0;
  ParticleSpec sp = ParticleSpec::massive(1.0);
  FieldSet zero = FieldSet::free_fields(1.0);
  Motion3D mo = rhs_3d(State3{0, {0, 0, 0}, {0.5, 0.2, -0.1}}, zero, sp, c);
  CHECK(norm(mo.dv_dt) == 0.0);

  double k = 0.7, m0 = 1.2;
  ParticleSpec sp2 = ParticleSpec::massive(m0);
  FieldSet lin = testsupport::linear_psi_field(k, m0 * m0);
  mo = rhs_3d(State3{0, {0, 0, 0}, {0, 0, 0}}, lin, sp2, c);
  // d(m0 v)/dt = -(1/m0) grad psi at rest
  CHECK(m0 * mo.dv_dt[0] == doctest::Approx(-k / m0).epsilon(1e-14));
  CHECK(mo.forces.scalar_gradient[0] == doctest::Approx(-k / m0).epsilon(1e-14));
  CHECK(norm(mo.forces.constraint_induced) == 0.0);

  // tachyon at v = c sqrt(2) has instantaneous mass m0
  ParticleSpec tp = ParticleSpec::tachyon(0.8);
  FieldSet tach = FieldSet::free_fields(-0.64);
  mo = rhs_3d(State3{0, {0, 0, 0}, {std::sqrt(2.0), 0, 0}}, tach, tp, c);
  CHECK(mo.mass == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("3D guards reject out-of-domain speeds") {
  double c = 1.0;
  ParticleSpec sp = ParticleSpec::massive(1.0);
  FieldSet zero = FieldSet::free_fields(1.0);
  try {
    rhs_3d(State3{0, {0, 0, 0}, {1.0 - 1e-12, 0, 0}}, zero, sp, c);
    FAIL("expected SpeedSingularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpeedSingularity);
  }

  ParticleSpec tp = ParticleSpec::tachyon(1.0);
  FieldSet tach = FieldSet::free_fields(-1.0);
  try {
    rhs_3d(State3{0, {0, 0, 0}, {1.0 + 1e-12, 0, 0}}, tach, tp, c);
    FAIL("expected TachyonBarrier");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TachyonBarrier);
  }

  ParticleSpec mp = ParticleSpec::massless();
  FieldSet null_mass = FieldSet::free_fields(0.0);
  try {
    rhs_3d(State3{0, {0, 0, 0}, {1, 0, 0}}, null_mass, mp, c);
    FAIL("expected MasslessRegime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MasslessRegime);
  }
}

TEST_CASE("3D acceleration agrees with the 4D route through the chain rule") {
  std::mt19937 rng(4004);
  int cases = 0;
  while (cases < 100) {
    FieldSet fs = testsupport::random_field_set(rng);
    double c = 1.0;
    std::array<double, 4> q = testsupport::random_point(rng);
    double mass_sq = fs.mass_sq.value(q, c, fs.param_values);
    if (std::fabs(mass_sq) < 0.15) continue;
    Vec3 qd = testsupport::random_qdot3_in_domain(rng, fs, q, c, 0.1);

    FieldSample s;
    Vec3 acc4;
    double h = 0.0;
    try {
      s = sample(fs, q, c);
      h = constraint_normal_form(s, qd, c);
      acc4 = rhs_4d(s, qd, c);
    } catch (const Error&) {
      continue;
    }
    Vec3 v = (c / h) * qd;
    double beta2 = norm2(v) / (c * c);
    if (std::fabs(1.0 - beta2) < 1e-3) continue;

    ParticleSpec spec;
    spec.regime = Regime::GeneralMass;
    Motion3D mo;
    try {
      mo = rhs_3d(State3{q[3] / c, {q[0], q[1], q[2]}, v}, fs, spec, c);
    } catch (const Error&) {
      continue;
    }

    // dv/dt = (ds/dt) d/ds (c qdot/h), with dh/ds = qddot4 from the constraint
    double dmass_flow = h * s.dmass[3];
    for (int l = 0; l < 3; ++l) dmass_flow += qd[l] * s.dmass[l];
    double qddot4 = (0.5 * c * c * dmass_flow + dot(acc4, qd)) / h;
    double ds_dt = c / h;
    for (int l = 0; l < 3; ++l) {
      double dv_ds = c * (acc4[l] * h - qd[l] * qddot4) / (h * h);
      double expected = dv_ds * ds_dt;
      CHECK(std::fabs(mo.dv_dt[l] - expected) / (1.0 + std::fabs(expected)) < 1e-10);
    }
    ++cases;
  }
}

TEST_CASE("effective-mass transform") {
  double c = 1.0, m0 = 1.1;
  ParticleSpec sp = ParticleSpec::massive(m0);
  FieldSet zero = FieldSet::free_fields(m0 * m0);
  DickeQuantities dq = dicke_transform(zero, sp, State3{0, {0, 0, 0}, {0.3, 0, 0}}, c);
  CHECK(dq.m_tilde0 == m0);
  CHECK(norm(dq.force) == 0.0);
  CHECK(dq.em_prefactor == 1.0);

  // psi = m0^2 c^2 constant: m~0 = m0 e, force still zero
  FieldSet const_psi = FieldSet::free_fields(m0 * m0);
  const_psi.psi = Expr::literal(m0 * m0 * c * c);
  dq = dicke_transform(const_psi, sp, State3{0, {0, 0, 0}, {0.3, 0, 0}}, c);
  CHECK(dq.m_tilde0 == doctest::Approx(m0 * std::exp(1.0)).epsilon(1e-15));
  CHECK(norm(dq.force) == 0.0);

  ParticleSpec mp = ParticleSpec::massless();
  CHECK_THROWS_AS(dicke_transform(zero, mp, State3{0, {0, 0, 0}, {1, 0, 0}}, c), Error);
}

TEST_CASE("grad m~0 equals m~0 grad mu on random fields") {
  std::mt19937 rng(112);
  int cases = 0;
  while (cases < 60) {
    FieldSet fs = testsupport::random_field_set(rng, false, false);
    double m0 = testsupport::uniform(rng, 0.5, 2.0);
    fs.mass_sq = Expr::literal(m0 * m0);
    ParticleSpec sp = ParticleSpec::massive(m0);
    double c = 1.0;
    Vec3 r{testsupport::uniform(rng, -1, 1), testsupport::uniform(rng, -1, 1),
           testsupport::uniform(rng, -1, 1)};
    double t = testsupport::uniform(rng, -1, 1);
    State3 st{t, r, {0.2, 0, 0}};

    DickeQuantities dq;
    FieldSample s;
    try {
      dq = dicke_transform(fs, sp, st, c);
      s = sample_at(fs, st, c);
    } catch (const Error&) {
      continue;
    }
    Vec3 grad_mu = (1.0 / (m0 * m0 * c * c)) * Vec3{s.dpsi[0], s.dpsi[1], s.dpsi[2]};

    auto m_tilde_at = [&](const Vec3& rr) {
      return dicke_transform(fs, sp, State3{t, rr, st.v}, c).m_tilde0;
    };
    bool skipped = false;
    for (int l = 0; l < 3 && !skipped; ++l) {
      double step = 1e-6 * (1.0 + std::fabs(r[l]));
      Vec3 hi = r, lo = r;
      hi[l] += step;
      lo[l] -= step;
      double fd;
      try {
        fd = (m_tilde_at(hi) - m_tilde_at(lo)) / (2.0 * step);
      } catch (const Error&) {
        skipped = true;
        break;
      }
      CHECK(std::fabs(fd - dq.m_tilde0 * grad_mu[l]) < 1e-5 * (1.0 + std::fabs(fd)));
    }
    if (!skipped) ++cases;
  }
}

TEST_CASE("massless force is the projected electromagnetic force") {
  double c = 1.0, e = 1.3;

  // no charge coupling: straight-line motion
  FieldSet zero = FieldSet::free_fields(0.0);
  Vec3 ev{1, 0, 0};
  Vec3 rhs = massless_rhs(0.0, {0, 0, 0}, ev, zero, 2.0, c);
  CHECK(norm(rhs) == 0.0);

  // grad V parallel to e_v is annihilated
  double e0 = 0.9;
  FieldSet par;
  par.phi[3] = Expr::scaled(-(e / c) * e0, Expr::parse("q1"));
  par.mass_sq = Expr::literal(0.0);
  FieldSample s = sample(par, {0, 0, 0, 0}, c);
  Vec3 f = massless_force(s, ev, c);
  CHECK(norm(f) < 1e-15);

  // grad V orthogonal to e_v gives -e grad V
  FieldSet perp;
  perp.phi[3] = Expr::scaled(-(e / c) * e0, Expr::parse("q2"));
  perp.mass_sq = Expr::literal(0.0);
  s = sample(perp, {0, 0, 0, 0}, c);
  f = massless_force(s, ev, c);
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == doctest::Approx(-e * e0).epsilon(1e-14));
  CHECK(std::fabs(dot(f, ev)) < 1e-14);

  CHECK_THROWS_AS(massless_rhs(0, {0, 0, 0}, {1.1, 0, 0}, zero, 1.0, c), Error);
  CHECK_THROWS_AS(massless_rhs(0, {0, 0, 0}, {1, 0, 0}, zero, -1.0, c), Error);
  try {
    massless_rhs(0, {0, 0, 0}, {1, 0, 0}, zero, 0.0, c);
    FAIL("expected NonPositiveEnergy");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NonPositiveEnergy);
  }
}

TEST_CASE("massless projector kills the force component along e_v on random fields") {
  std::mt19937 rng(5150);
  int cases = 0;
  while (cases < 100) {
    FieldSet fs = testsupport::random_field_set(rng, false, false);
    fs.mass_sq = Expr::literal(0.0);
    Vec3 dir{testsupport::uniform(rng, -1, 1), testsupport::uniform(rng, -1, 1),
             testsupport::uniform(rng, -1, 1)};
    double n = norm(dir);
    if (n < 1e-3) continue;
    dir = dir / n;
    FieldSample s;
    try {
      s = sample(fs, testsupport::random_point(rng), 1.0);
    } catch (const Error&) {
      continue;
    }
    Vec3 f = massless_force(s, dir, 1.0);
    CHECK(std::fabs(dot(f, dir)) <= 1e-14 * std::fmax(1.0, norm(f)));
    ++cases;
  }
}

TEST_CASE("fields compatibility residuals") {
  double c = 1.0;
  // constant psi: both residuals vanish
  FieldSet fs = FieldSet::free_fields(0.0);
  fs.psi = Expr::literal(3.0);
  CompatibilityResidual res = fields_compatibility(0, {0, 0, 0}, {1, 0, 0}, fs, c);
  CHECK(res.force_dot_grad_psi == 0.0);
  CHECK(res.dpsi_dt == 0.0);

  // uncharged particle in a nonconstant psi: dpsi/dt residual is nonzero
  FieldSet bad = FieldSet::free_fields(0.0);
  bad.psi = Expr::parse("0.5*q1");
  res = fields_compatibility(0, {0, 0, 0}, {1, 0, 0}, bad, c);
  CHECK(res.dpsi_dt == doctest::Approx(0.5 * c));

  // constructed orthogonal case: F along y, psi a function of x only
  double e = 1.0, e0 = 0.8;
  FieldSet ortho;
  ortho.phi[3] = Expr::scaled(-(e / c) * e0, Expr::parse("q2"));
  ortho.psi = Expr::parse("0.4*q1");
  ortho.mass_sq = Expr::literal(0.0);
  res = fields_compatibility(0, {0, 0, 0}, {0, 0, 1}, ortho, c);
  CHECK(res.force_dot_grad_psi < 1e-14);
}

TEST_CASE("mass and energy relations") {
  double c = 2.0;
  ParticleSpec mp = ParticleSpec::massive(1.5);
  MassEnergy me = energy_mass_relations(mp, MomentumMagnitude{0.0}, c);
  CHECK(me.energy == doctest::Approx(1.5 * c * c));  // rest energy
  CHECK(me.qdot4 == doctest::Approx(1.5 * c));

  me = energy_mass_relations(mp, MomentumMagnitude{2.0}, c);
  CHECK(me.energy == doctest::Approx(c * std::sqrt(1.5 * 1.5 * c * c + 4.0)));

  ParticleSpec tp = ParticleSpec::tachyon(0.9);
  me = energy_mass_relations(tp, SpeedMagnitude{c * std::sqrt(2.0)}, c);
  CHECK(me.mass == doctest::Approx(0.9).epsilon(1e-13));

  try {
    energy_mass_relations(tp, MomentumMagnitude{0.9 * c}, c);
    FAIL("expected TachyonMomentumTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TachyonMomentumTooSmall);
  }

  ParticleSpec ml = ParticleSpec::massless();
  me = energy_mass_relations(ml, MomentumMagnitude{2.0}, 1.0);
  CHECK(me.energy == 2.0);
  CHECK(me.qdot4 == 2.0);

  ParticleSpec mv = ParticleSpec::massive(1.0);
  me = energy_mass_relations(mv, SpeedMagnitude{0.6}, 1.0);
  CHECK(me.mass == doctest::Approx(1.25));
  CHECK(me.energy == doctest::Approx(1.25));
}
