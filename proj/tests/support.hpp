#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "relsim/fields.hpp"
#include "relsim/particle.hpp"

namespace testsupport {

using relsim::Expr;
using relsim::FieldSet;
using relsim::Vec3;

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int pick(std::mt19937& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

// Random smooth expression over q1..q4: polynomials, trig, bounded exp, and
// pole-free log/sqrt/div composites. Designed so value and first three
// derivatives stay O(1..1e3) on the unit box, keeping central differences
// meaningful.
inline std::string random_expr_source(std::mt19937& rng, int depth = 3) {
  if (depth <= 0 || pick(rng, 4) == 0) {
    switch (pick(rng, 3)) {
      case 0: {
        char var[3] = {'q', static_cast<char>('1' + pick(rng, 4)), 0};
        return var;
      }
      case 1:
        return relsim::format_double(uniform(rng, -2.0, 2.0));
      default: {
        char var[3] = {'q', static_cast<char>('1' + pick(rng, 4)), 0};
        return std::string(var) + "^" + std::to_string(2 + pick(rng, 2));
      }
    }
  }
  std::string a = random_expr_source(rng, depth - 1);
  std::string b = random_expr_source(rng, depth - 1);
  switch (pick(rng, 8)) {
    case 0: return "(" + a + ")+(" + b + ")";
    case 1: return "(" + a + ")-(" + b + ")";
    case 2: return "(" + a + ")*(" + b + ")";
    case 3: return "(" + a + ")/(2.5+(" + b + ")^2)";
    case 4: return "sin(" + a + ")";
    case 5: return "cos(" + a + ")";
    case 6: return "tanh(" + a + ")";
    default: return "exp(0.3*sin(" + a + "))";
  }
}

inline Expr random_expr(std::mt19937& rng, int depth = 3) {
  return Expr::parse(random_expr_source(rng, depth));
}

inline std::array<double, 4> random_point(std::mt19937& rng, double lo = -1.0,
                                          double hi = 1.0) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi),
          uniform(rng, lo, hi)};
}

// Field set with random smooth phi, psi, and a mass function bounded away
// from zero (random sign when allow_negative).
inline FieldSet random_field_set(std::mt19937& rng, bool allow_negative_mass = true,
                                 bool position_dependent_mass = true) {
  FieldSet fs;
  for (int sigma = 0; sigma < 4; ++sigma) fs.phi[sigma] = random_expr(rng, 2);
  fs.psi = random_expr(rng, 2);
  double base = uniform(rng, 0.4, 2.0);
  if (allow_negative_mass && pick(rng, 2) == 0) base = -base;
  if (position_dependent_mass && pick(rng, 2) == 0) {
    std::string wiggle = relsim::format_double(0.2 * base);
    fs.mass_sq = Expr::parse(relsim::format_double(base) + "+" + wiggle +
                             "*sin(q1+0.7*q4)");
  } else {
    fs.mass_sq = Expr::literal(base);
  }
  return fs;
}

// Spatial velocities with the constraint radicand kept clear of zero.
inline Vec3 random_qdot3_in_domain(std::mt19937& rng, const FieldSet& fs,
                                   const std::array<double, 4>& q, double c,
                                   double margin = 0.05) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Vec3 qd{uniform(rng, -0.9, 0.9), uniform(rng, -0.9, 0.9), uniform(rng, -0.9, 0.9)};
    double mass_sq = fs.mass_sq.value(q, c, fs.param_values);
    if (mass_sq * c * c + norm2(qd) > margin) return qd;
  }
  return {1.5, 0.0, 0.0};
}

inline FieldSet uniform_b_field(double b0, double e, double c) {
  // Symmetric gauge: A = (-B0 y / 2, B0 x / 2, 0), so phi_l = (e/c) A_l.
  FieldSet fs;
  double k = e / c * b0 / 2.0;
  fs.phi[0] = Expr::scaled(-k, Expr::parse("q2"));
  fs.phi[1] = Expr::scaled(k, Expr::parse("q1"));
  fs.phi[2] = Expr::literal(0.0);
  fs.phi[3] = Expr::literal(0.0);
  fs.psi = Expr::literal(0.0);
  fs.mass_sq = Expr::literal(1.0);  // caller overrides when needed
  return fs;
}

inline FieldSet linear_psi_field(double k, double mass_sq_value) {
  FieldSet fs;
  fs.psi = Expr::scaled(k, Expr::parse("q1"));
  fs.mass_sq = Expr::literal(mass_sq_value);
  return fs;
}

// Cubic Hermite interpolation of r(t) through (t_k, r_k, v_k) nodes; the
// velocities make the interpolation error O(dt^4).
struct HermitePath {
  std::vector<double> t;
  std::vector<Vec3> r;
  std::vector<Vec3> v;

  double t_min() const { return t.front(); }
  double t_max() const { return t.back(); }

  Vec3 at(double tq) const {
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (t[mid] <= tq) lo = mid;
      else hi = mid;
    }
    double dt = t[hi] - t[lo];
    double th = (tq - t[lo]) / dt;
    double th2 = th * th, th3 = th2 * th;
    double h00 = 2 * th3 - 3 * th2 + 1;
    double h10 = th3 - 2 * th2 + th;
    double h01 = -2 * th3 + 3 * th2;
    double h11 = th3 - th2;
    return h00 * r[lo] + (h10 * dt) * v[lo] + h01 * r[hi] + (h11 * dt) * v[hi];
  }
};

}  // namespace testsupport
