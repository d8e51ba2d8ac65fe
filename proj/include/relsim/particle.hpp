#pragma once

#include "relsim/expr.hpp"

namespace relsim {

// The constraint g(u, u) = M c^2 distinguishes the particle kinds:
// M = +m0^2 (subluminal), M = -m0^2 (tachyon, v > c), M = 0 (light speed),
// or a general function of position.
enum class Regime { Massive, Tachyon, Massless, GeneralMass };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Massive: return "massive";
    case Regime::Tachyon: return "tachyon";
    case Regime::Massless: return "massless";
    case Regime::GeneralMass: return "general";
  }
  return "?";
}

struct ParticleSpec {
  Regime regime = Regime::Massive;
  double m0 = 1.0;             // rest mass (massive), landmark mass (tachyon)
  double charge_e = 0.0;       // electromagnetic charge
  double scalar_charge = 1.0;  // multiplies the configured psi; 0 for massless
  Expr energy = Expr::literal(1.0);  // massless kinetic energy E(q), E > 0

  static ParticleSpec massive(double m0, double e = 0.0) {
    ParticleSpec p;
    p.regime = Regime::Massive;
    p.m0 = m0;
    p.charge_e = e;
    return p;
  }
  static ParticleSpec tachyon(double m0, double e = 0.0) {
    ParticleSpec p;
    p.regime = Regime::Tachyon;
    p.m0 = m0;
    p.charge_e = e;
    return p;
  }
  static ParticleSpec massless(double e = 0.0, double energy = 1.0) {
    ParticleSpec p;
    p.regime = Regime::Massless;
    p.m0 = 0.0;
    p.charge_e = e;
    p.scalar_charge = 0.0;
    p.energy = Expr::literal(energy);
    return p;
  }

  // Constant mass-squared for the preset regimes.
  double preset_mass_sq() const {
    switch (regime) {
      case Regime::Massive: return m0 * m0;
      case Regime::Tachyon: return -m0 * m0;
      default: return 0.0;
    }
  }
};

}  // namespace relsim
