#include "relsim/minkowski.hpp"

#include <cmath>

namespace relsim {

FourVector FourVector::of(double a, double b, double c, double d) {
  FourVector u{{a, b, c, d}};
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(u.v[i]))
      throw Error(ErrorCode::NonFinite,
                  "four-vector component " + std::to_string(i + 1) + " is not finite");
  }
  return u;
}

FourVector FourMomentum::contravariant() const {
  return {{-cov[0], -cov[1], -cov[2], cov[3]}};
}

double metric_contract(const FourVector& u, const FourVector& w) {
  return u[3] * w[3] - (u[0] * w[0] + u[1] * w[1] + u[2] * w[2]);
}

FourMomentum lower(const FourVector& u) {
  return {{-u[0], -u[1], -u[2], u[3]}};
}

double constraint_residual(const FourVector& u, double mass_sq, double c) {
  return metric_contract(u, u) - mass_sq * c * c;
}

Split3D split_3d(const FourVector& q, const FourVector& qdot, double c) {
  double scale = std::sqrt(qdot[0] * qdot[0] + qdot[1] * qdot[1] +
                           qdot[2] * qdot[2] + qdot[3] * qdot[3]);
  if (std::fabs(qdot[3]) < kDegenerateVelocityTol * std::fmax(1.0, scale))
    throw Error(ErrorCode::DegenerateVelocity,
                "qdot4 vanishes; state lies on the excluded hyperplane");
  Split3D st;
  st.t = q[3] / c;
  st.r = q.spatial();
  st.qdot4 = qdot[3];
  for (int l = 0; l < 3; ++l) st.v[l] = c * qdot[l] / qdot[3];
  return st;
}

void unsplit_3d(const Split3D& st, double c, FourVector& q_out, FourVector& qdot_out) {
  q_out = {{st.r[0], st.r[1], st.r[2], c * st.t}};
  qdot_out = {{st.v[0] * st.qdot4 / c, st.v[1] * st.qdot4 / c,
               st.v[2] * st.qdot4 / c, st.qdot4}};
}

}  // namespace relsim
