#pragma once

#include <array>
#include <cmath>

namespace relsim {

// Forward-mode dual number carrying the value of a scalar together with its
// four partial derivatives with respect to the space-time coordinates q1..q4.
// f(q + eps) = f(q) + eps_k df/dq^k; one pass yields exact first derivatives.
struct Dual4 {
  double val = 0.0;
  std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};
};

inline Dual4 dual_const(double v) { return {v, {0, 0, 0, 0}}; }

inline Dual4 dual_var(double v, int k) {
  Dual4 r{v, {0, 0, 0, 0}};
  r.d[k] = 1.0;
  return r;
}

inline Dual4 operator+(const Dual4& a, const Dual4& b) {
  return {a.val + b.val,
          {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2], a.d[3] + b.d[3]}};
}

inline Dual4 operator-(const Dual4& a, const Dual4& b) {
  return {a.val - b.val,
          {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2], a.d[3] - b.d[3]}};
}

inline Dual4 operator-(const Dual4& a) {
  return {-a.val, {-a.d[0], -a.d[1], -a.d[2], -a.d[3]}};
}

inline Dual4 operator*(const Dual4& a, const Dual4& b) {
  Dual4 r;
  r.val = a.val * b.val;
  for (int k = 0; k < 4; ++k) r.d[k] = a.val * b.d[k] + a.d[k] * b.val;
  return r;
}

inline Dual4 operator*(double s, const Dual4& a) {
  return {s * a.val, {s * a.d[0], s * a.d[1], s * a.d[2], s * a.d[3]}};
}

// Caller guarantees b.val != 0.
inline Dual4 operator/(const Dual4& a, const Dual4& b) {
  Dual4 r;
  double inv = 1.0 / b.val;
  r.val = a.val * inv;
  for (int k = 0; k < 4; ++k) r.d[k] = (a.d[k] - r.val * b.d[k]) * inv;
  return r;
}

inline Dual4 chain(double f, double df, const Dual4& a) {
  return {f, {df * a.d[0], df * a.d[1], df * a.d[2], df * a.d[3]}};
}

inline Dual4 sin(const Dual4& a) { return chain(std::sin(a.val), std::cos(a.val), a); }
inline Dual4 cos(const Dual4& a) { return chain(std::cos(a.val), -std::sin(a.val), a); }
inline Dual4 exp(const Dual4& a) {
  double e = std::exp(a.val);
  return chain(e, e, a);
}
inline Dual4 log(const Dual4& a) { return chain(std::log(a.val), 1.0 / a.val, a); }
inline Dual4 sqrt(const Dual4& a) {
  double s = std::sqrt(a.val);
  return chain(s, 0.5 / s, a);
}
inline Dual4 sinh(const Dual4& a) { return chain(std::sinh(a.val), std::cosh(a.val), a); }
inline Dual4 cosh(const Dual4& a) { return chain(std::cosh(a.val), std::sinh(a.val), a); }
inline Dual4 tanh(const Dual4& a) {
  double t = std::tanh(a.val);
  return chain(t, 1.0 - t * t, a);
}
inline Dual4 tan(const Dual4& a) {
  double c = std::cos(a.val);
  return chain(std::tan(a.val), 1.0 / (c * c), a);
}
inline Dual4 abs(const Dual4& a) {
  double sign = a.val > 0.0 ? 1.0 : (a.val < 0.0 ? -1.0 : 0.0);
  return chain(std::fabs(a.val), sign, a);
}

// Integer power by repeated squaring; valid for any base sign.
inline Dual4 pow_int(Dual4 base, long long n) {
  if (n < 0) return dual_const(1.0) / pow_int(base, -n);
  Dual4 acc = dual_const(1.0);
  while (n > 0) {
    if (n & 1) acc = acc * base;
    base = base * base;
    n >>= 1;
  }
  return acc;
}

// General power via exp(b log a); caller guarantees a.val > 0.
inline Dual4 pow_general(const Dual4& a, const Dual4& b) {
  return exp(b * log(a));
}

}  // namespace relsim
