#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relsim/run.hpp"

namespace {

int do_simulate(const std::string& config_path, const std::string& out_dir,
                bool verify) {
  relsim::RunConfig cfg = relsim::load_config(config_path);
  relsim::RunResult res = relsim::run_simulation(cfg, out_dir, verify);
  std::cout << "trajectory:  " << res.trajectory_path << "\n"
            << "diagnostics: " << res.diagnostics_path << "\n";
  if (res.exit_code != 0) std::cerr << "verification failed\n";
  return res.exit_code;
}

int do_surface(const std::string& regime_str, double m0, int grid, double range,
               double c, const std::string& out_path) {
  relsim::Regime regime;
  if (regime_str == "massive") regime = relsim::Regime::Massive;
  else if (regime_str == "tachyon") regime = relsim::Regime::Tachyon;
  else if (regime_str == "massless") regime = relsim::Regime::Massless;
  else
    throw relsim::Error(relsim::ErrorCode::ConfigError,
                        "--regime must be massive, tachyon, or massless");
  if (regime != relsim::Regime::Massless && !(m0 > 0.0))
    throw relsim::Error(relsim::ErrorCode::ConfigError, "--m0 must be positive");
  if (!(c > 0.0))
    throw relsim::Error(relsim::ErrorCode::ConfigError, "--c must be positive");

  // Samples are emitted in units of m0 c (massive/tachyon) or c (massless),
  // so the surface equation reads w^2 - x^2 - y^2 = +1 / -1 / 0.
  if (out_path.empty() || out_path == "-") {
    relsim::write_surface_csv(std::cout, regime, grid, range);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
      throw relsim::Error(relsim::ErrorCode::ConfigError,
                          "cannot write surface to '" + out_path + "'");
    relsim::write_surface_csv(out, regime, grid, range);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relativistic particle dynamics under the four-velocity constraint"};
  app.require_subcommand(1);

  std::string config_path, out_dir, out_file;
  bool verify = false;

  CLI::App* sim = app.add_subcommand("simulate", "Integrate one configured scenario");
  sim->add_option("config", config_path, "Path to the run config")->required();
  sim->add_option("--out", out_dir, "Directory for output files");
  sim->add_flag("--verify", verify, "Run the coefficient and Chetaev oracles");

  std::string regime = "massive";
  double m0 = 1.0, range = 2.0, c = 1.0;
  int grid = 64;
  CLI::App* surf =
      app.add_subcommand("surface", "Sample the velocity-space constraint surface");
  surf->add_option("--regime", regime, "massive | tachyon | massless")->required();
  surf->add_option("--m0", m0, "Rest mass scale");
  surf->add_option("--grid", grid, "Grid points per axis")->required();
  surf->add_option("--range", range, "Half-width of the sampled square");
  surf->add_option("--c", c, "Speed of light");
  surf->add_option("--out", out_file, "Output CSV path (default stdout)");

  std::string sweep_dir, sweep_out;
  int jobs = 0;
  CLI::App* sw = app.add_subcommand("sweep", "Run every config in a directory");
  sw->add_option("dir", sweep_dir, "Directory of *.ini / *.cfg configs")->required();
  sw->add_option("--out", sweep_out, "Root directory for per-config outputs");
  sw->add_option("--jobs", jobs, "Worker threads (default: hardware)");
  sw->add_flag("--verify", verify, "Run the oracles for every config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return do_simulate(config_path, out_dir, verify);
    if (surf->parsed()) return do_surface(regime, m0, grid, range, c, out_file);
    if (sw->parsed()) return relsim::sweep_directory(sweep_dir, sweep_out, jobs, verify);
  } catch (const relsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return relsim::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
