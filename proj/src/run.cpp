#include "relsim/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "json.hpp"

namespace relsim {

namespace fs_std = std::filesystem;
using ordered_json = nlohmann::ordered_json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::NonFinite:
    case ErrorCode::InvalidRegime:
      return 2;
    case ErrorCode::IncompatibleFields:
      return 4;
    default:
      return 3;
  }
}

namespace {

State4 to_state4(const RunConfig& cfg) {
  if (cfg.init_form == RunConfig::InitForm::FourD) return cfg.init4;
  State4 st;
  st.s = 0.0;
  st.q = {cfg.init3.r[0], cfg.init3.r[1], cfg.init3.r[2], cfg.c * cfg.init3.t};
  double beta2 = norm2(cfg.init3.v) / (cfg.c * cfg.c);
  double mass_sq = sample(cfg.fields, st.q, cfg.c).mass_sq;
  double m = std::sqrt(mass_sq / (1.0 - beta2));
  for (int l = 0; l < 3; ++l) st.qdot[l] = m * cfg.init3.v[l];
  return st;
}

State3 to_state3(const RunConfig& cfg) {
  if (cfg.init_form == RunConfig::InitForm::ThreeD) return cfg.init3;
  FieldSample s0 = sample(cfg.fields, cfg.init4.q, cfg.c);
  double h = constraint_normal_form(s0, cfg.init4.qdot, cfg.c);
  FourVector q{{cfg.init4.q[0], cfg.init4.q[1], cfg.init4.q[2], cfg.init4.q[3]}};
  FourVector qd{{cfg.init4.qdot[0], cfg.init4.qdot[1], cfg.init4.qdot[2], h}};
  Split3D sp = split_3d(q, qd, cfg.c);
  return State3{sp.t, sp.r, sp.v};
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  out << "s,t,q1,q2,q3,v1,v2,v3,qdot4,m,E,constraint_residual,"
         "FL1,FL2,FL3,FC1,FC2,FC3,FD1,FD2,FD3\n";
  for (const TrajectorySample& p : traj.samples) {
    out << format_double(p.s) << ',' << format_double(p.t);
    for (int l = 0; l < 3; ++l) out << ',' << format_double(p.r[l]);
    for (int l = 0; l < 3; ++l) out << ',' << format_double(p.v[l]);
    out << ',' << format_double(p.qdot4) << ',' << format_double(p.mass) << ','
        << format_double(p.energy) << ',' << format_double(p.constraint_residual);
    for (int l = 0; l < 3; ++l) out << ',' << format_double(p.f_lorentz[l]);
    for (int l = 0; l < 3; ++l) out << ',' << format_double(p.f_constraint[l]);
    for (int l = 0; l < 3; ++l) out << ',' << format_double(p.f_dicke[l]);
    out << '\n';
  }
}

// Verification pass: closed-form reduced coefficients against the
// finite-difference reduction, plus the Chetaev-equation residual with the
// multiplier, sampled along the computed trajectory.
ordered_json verify_trajectory(const RunConfig& cfg, const Trajectory& traj,
                               bool& ok) {
  ordered_json rep;
  if (cfg.spec.regime == Regime::Massless) {
    rep["skipped"] = "massless regime (reduced coefficients require M != 0)";
    return rep;
  }
  double max_dev = 0.0;
  double max_chetaev = 0.0;
  std::size_t stride = std::max<std::size_t>(1, traj.samples.size() / 64);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < traj.samples.size(); k += stride) {
    const TrajectorySample& p = traj.samples[k];
    std::array<double, 4> q{p.r[0], p.r[1], p.r[2], cfg.c * p.t};
    Vec3 qdot3 = (p.qdot4 / cfg.c) * p.v;
    CoefficientReport rep_k = coefficient_oracle(q, qdot3, cfg.fields, cfg.c);
    max_dev = std::fmax(max_dev, rep_k.max_rel_dev);

    FieldSample s = sample(cfg.fields, q, cfg.c);
    double h = constraint_normal_form(s, qdot3, cfg.c);
    Vec3 acc = rhs_4d(s, qdot3, cfg.c);
    double lambda = chetaev_multiplier(s, qdot3, cfg.c);
    UnconstrainedCoeffs uc = unconstrained_coeffs(s, {qdot3[0], qdot3[1], qdot3[2], h});
    double dmass_flow = h * s.dmass[3];
    for (int l = 0; l < 3; ++l) dmass_flow += qdot3[l] * s.dmass[l];
    double qddot4 = (0.5 * cfg.c * cfg.c * dmass_flow + dot(acc, qdot3)) / h;
    for (int l = 0; l < 3; ++l)
      max_chetaev =
          std::fmax(max_chetaev, std::fabs(-acc[l] + uc.A[l] + lambda * qdot3[l] / h));
    max_chetaev = std::fmax(max_chetaev, std::fabs(qddot4 + uc.A[3] - lambda));
    ++checked;
  }
  rep["states_checked"] = checked;
  rep["coefficient_max_rel_dev"] = max_dev;
  rep["chetaev_residual_max"] = max_chetaev;
  bool pass = max_dev < 1e-6 && max_chetaev < 1e-9;
  rep["pass"] = pass;
  ok = ok && pass;
  return rep;
}

std::string resolve_path(const std::string& out_dir, const std::string& path) {
  fs_std::path p(path);
  if (!out_dir.empty() && p.is_relative()) p = fs_std::path(out_dir) / p;
  if (p.has_parent_path()) fs_std::create_directories(p.parent_path());
  return p.string();
}

}  // namespace

RunResult run_simulation(const RunConfig& cfg, const std::string& out_dir,
                         bool verify) {
  RunResult result;
  bool do_verify = verify || cfg.verify;

  if (cfg.spec.regime == Regime::Massless) {
    MasslessState init{cfg.init3.t, cfg.init3.r, cfg.init_direction};
    result.trajectory =
        integrate_massless(init, cfg.fields, cfg.spec, cfg.horizon, cfg.c, cfg.settings);
  } else if (cfg.parametrization == RunConfig::Parametrization::S) {
    result.trajectory = integrate_4d(to_state4(cfg), cfg.fields, cfg.spec, cfg.horizon,
                                     cfg.c, cfg.settings);
  } else {
    result.trajectory = integrate_3d(to_state3(cfg), cfg.fields, cfg.spec, cfg.horizon,
                                     cfg.c, cfg.settings);
  }
  const Trajectory& traj = result.trajectory;

  ordered_json diag;
  ordered_json config_echo;
  for (const auto& [key, value] : cfg.echo) config_echo[key] = value;
  diag["config"] = config_echo;

  ordered_json run_block;
  run_block["regime"] = regime_name(cfg.spec.regime);
  run_block["parametrization"] =
      cfg.spec.regime == Regime::Massless
          ? "t"
          : (cfg.parametrization == RunConfig::Parametrization::S ? "s" : "t");
  run_block["horizon"] = cfg.horizon;
  run_block["samples_recorded"] = traj.samples.size();
  diag["run"] = run_block;

  ordered_json d;
  double max_res = 0.0;
  for (const TrajectorySample& p : traj.samples)
    max_res = std::fmax(max_res, p.constraint_residual);
  d["max_constraint_residual"] = max_res;
  if (cfg.spec.regime != Regime::Massless &&
      cfg.parametrization == RunConfig::Parametrization::S)
    d["max_shadow_drift"] = traj.max_shadow_drift;
  if (cfg.spec.regime != Regime::Massless &&
      cfg.parametrization == RunConfig::Parametrization::T)
    d["ds_dt_mass_identity_residual"] = ds_dt_mass_residual(traj);
  if (cfg.spec.regime == Regime::Massless) {
    d["max_unit_norm_drift"] = traj.max_unit_norm_drift;
    d["max_force_dot_ev"] = traj.max_force_dot_ev;
    d["max_compat_force_residual"] = traj.max_compat_force;
    d["max_compat_dpsi_residual"] = traj.max_compat_dpsi;
  }
  if (!traj.samples.empty()) {
    const TrajectorySample& last = traj.samples.back();
    d["final"] = {{"s", last.s},
                  {"t", last.t},
                  {"r", {last.r[0], last.r[1], last.r[2]}},
                  {"v", {last.v[0], last.v[1], last.v[2]}},
                  {"m", last.mass},
                  {"E", last.energy}};
  }
  diag["diagnostics"] = d;

  bool verify_ok = true;
  if (do_verify) diag["oracle"] = verify_trajectory(cfg, traj, verify_ok);
  result.exit_code = verify_ok ? 0 : 5;

  result.trajectory_path = resolve_path(out_dir, cfg.out_trajectory);
  result.diagnostics_path = resolve_path(out_dir, cfg.out_diagnostics);
  {
    std::ofstream csv(result.trajectory_path, std::ios::binary);
    if (!csv)
      throw Error(ErrorCode::ConfigError,
                  "cannot write trajectory to '" + result.trajectory_path + "'");
    write_csv(csv, traj);
  }
  result.diagnostics_json = diag.dump(2);
  {
    std::ofstream js(result.diagnostics_path, std::ios::binary);
    if (!js)
      throw Error(ErrorCode::ConfigError,
                  "cannot write diagnostics to '" + result.diagnostics_path + "'");
    js << result.diagnostics_json << '\n';
  }
  return result;
}

void write_surface_csv(std::ostream& out, Regime regime, int grid_n, double range) {
  out << "x,y,w\n";
  if (grid_n < 2) grid_n = 2;
  for (int i = 0; i < grid_n; ++i) {
    double x = -range + 2.0 * range * i / (grid_n - 1);
    for (int j = 0; j < grid_n; ++j) {
      double y = -range + 2.0 * range * j / (grid_n - 1);
      double rho2 = x * x + y * y;
      double w;
      switch (regime) {
        case Regime::Massive:
          w = std::sqrt(1.0 + rho2);
          break;
        case Regime::Tachyon:
          if (rho2 < 1.0) continue;  // one-sheet hyperboloid gap
          w = std::sqrt(rho2 - 1.0);
          break;
        default:
          w = std::sqrt(rho2);
          break;
      }
      out << format_double(x) << ',' << format_double(y) << ',' << format_double(w)
          << '\n';
    }
  }
}

int sweep_directory(const std::string& dir, const std::string& out_dir, int jobs,
                    bool verify) {
  std::vector<fs_std::path> configs;
  for (const auto& entry : fs_std::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".ini" || ext == ".cfg") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty())
    throw Error(ErrorCode::ConfigError, "no *.ini or *.cfg configs in '" + dir + "'");

  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;

  std::vector<int> codes(configs.size(), 0);
  std::vector<std::string> messages(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;

  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= configs.size()) return;
      const fs_std::path& path = configs[idx];
      std::string run_out =
          (fs_std::path(out_dir.empty() ? "." : out_dir) / path.stem()).string();
      try {
        RunConfig cfg = load_config(path.string());
        RunResult res = run_simulation(cfg, run_out, verify);
        codes[idx] = res.exit_code;
        messages[idx] = res.exit_code == 0 ? "ok" : "verification failed";
      } catch (const Error& e) {
        codes[idx] = exit_code_for(e.code());
        messages[idx] = e.what();
      }
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << path.filename().string() << ": " << messages[idx] << "\n";
    }
  };

  std::vector<std::thread> pool;
  for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < configs.size(); ++i)
    if (codes[i] != 0) return codes[i];
  return 0;
}

}  // namespace relsim
