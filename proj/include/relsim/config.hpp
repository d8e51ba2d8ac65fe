#pragma once

#include <map>
#include <string>
#include <vector>

#include "relsim/integrate.hpp"

namespace relsim {

// A fully resolved run description: particle, fields, initial conditions,
// horizon, integrator settings, and output destinations.
struct RunConfig {
  ParticleSpec spec;
  FieldSet fields;
  double c = 1.0;

  enum class InitForm { FourD, ThreeD };
  InitForm init_form = InitForm::ThreeD;
  State4 init4;
  State3 init3;          // massless runs use v as the (normalized) direction
  Vec3 init_direction{}; // massless unit direction

  double horizon = 1.0;
  enum class Parametrization { S, T } parametrization = Parametrization::T;
  IntegratorSettings settings;
  bool verify = false;

  std::string out_trajectory = "trajectory.csv";
  std::string out_diagnostics = "diagnostics.json";

  // Resolved key/value pairs in file order, echoed into the diagnostics.
  std::vector<std::pair<std::string, std::string>> echo;
};

// Parse and validate an INI-style config file. Every failure is reported as
// ConfigError naming the offending section/key.
RunConfig load_config(const std::string& path);

// Same, from in-memory text (used by tests).
RunConfig load_config_text(const std::string& text, const std::string& origin = "<memory>");

}  // namespace relsim
