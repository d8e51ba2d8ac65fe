#include "relsim/fields.hpp"

namespace relsim {

namespace {

Dual4 sample_one(const Expr& e, const char* label, const std::array<double, 4>& q,
                 double c, const std::vector<double>& params) {
  try {
    return e.dual(q, c, params);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::DomainError)
      throw Error(ErrorCode::DomainError, std::string(label) + ": " + err.what());
    throw;
  }
}

}  // namespace

FieldSample sample(const FieldSet& fs, const std::array<double, 4>& q, double c) {
  static const char* phi_names[4] = {"phi1", "phi2", "phi3", "phi4"};
  FieldSample s;
  for (int sigma = 0; sigma < 4; ++sigma) {
    Dual4 d = sample_one(fs.phi[sigma], phi_names[sigma], q, c, fs.param_values);
    s.phi[sigma] = d.val;
    for (int nu = 0; nu < 4; ++nu) s.dphi[sigma][nu] = d.d[nu];
  }
  Dual4 p = sample_one(fs.psi, "psi", q, c, fs.param_values);
  s.psi = p.val;
  s.dpsi = p.d;
  Dual4 m = sample_one(fs.mass_sq, "M", q, c, fs.param_values);
  s.mass_sq = m.val;
  s.dmass = m.d;
  return s;
}

Mat4 faraday(const FieldSample& s) {
  Mat4 f{};
  for (int sigma = 0; sigma < 4; ++sigma)
    for (int nu = 0; nu < 4; ++nu)
      f[sigma][nu] = s.dphi[sigma][nu] - s.dphi[nu][sigma];
  return f;
}

EmDecomposition em_3d(const FieldSet& fs, double t, const Vec3& r, double charge_e,
                      double c) {
  if (charge_e == 0.0)
    throw Error(ErrorCode::ChargeZero,
                "A/V reconstruction requires a nonzero charge e");
  std::array<double, 4> q{r[0], r[1], r[2], c * t};
  FieldSample s = sample(fs, q, c);
  double k = c / charge_e;  // A_l = (c/e) phi_l, V = -(c/e) phi_4
  EmDecomposition em;
  for (int l = 0; l < 3; ++l) {
    em.vector_potential[l] = k * s.phi[l];
    em.da_dt[l] = c * k * s.dphi[l][3];
    em.grad_v[l] = -k * s.dphi[3][l];
  }
  em.scalar_potential = -k * s.phi[3];
  em.rot_a = {k * (s.dphi[2][1] - s.dphi[1][2]),
              k * (s.dphi[0][2] - s.dphi[2][0]),
              k * (s.dphi[1][0] - s.dphi[0][1])};
  return em;
}

Vec3 lorentz_force(const FieldSample& s, const Vec3& v, double c) {
  Vec3 f;
  for (int j = 0; j < 3; ++j) {
    double acc = c * (s.dphi[3][j] - s.dphi[j][3]);
    for (int l = 0; l < 3; ++l) acc += v[l] * (s.dphi[l][j] - s.dphi[j][l]);
    f[j] = acc;
  }
  return f;
}

}  // namespace relsim
