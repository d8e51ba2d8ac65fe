#pragma once

#include <array>
#include <cmath>

namespace relsim {

struct Vec3 {
  double v[3] = {0.0, 0.0, 0.0};

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  Vec3& operator+=(const Vec3& o) {
    v[0] += o.v[0];
    v[1] += o.v[1];
    v[2] += o.v[2];
    return *this;
  }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }

inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }

inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

inline Vec3 operator*(const Vec3& a, double s) { return s * a; }

inline Vec3 operator/(const Vec3& a, double s) { return (1.0 / s) * a; }

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline double norm2(const Vec3& a) { return dot(a, a); }

inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

struct Mat3 {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

  double* operator[](int i) { return m[i]; }
  const double* operator[](int i) const { return m[i]; }

  static Mat3 identity() {
    Mat3 r;
    r[0][0] = r[1][1] = r[2][2] = 1.0;
    return r;
  }
};

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}

inline Vec3 matvec(const Mat3& a, const Vec3& x) {
  Vec3 r;
  for (int i = 0; i < 3; ++i)
    r[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2];
  return r;
}

inline double frobenius_norm(const Mat3& a) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a[i][j] * a[i][j];
  return std::sqrt(s);
}

using Mat4 = std::array<std::array<double, 4>, 4>;

}  // namespace relsim
