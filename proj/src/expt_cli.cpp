#include "kinlab/expt/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kinlab/boltz/frequency.hpp"
#include "kinlab/ensemble/samplers.hpp"
#include "kinlab/expt/experiments.hpp"
#include "kinlab/md/io.hpp"
#include "kinlab/md/simulator.hpp"

namespace kinlab::expt {
namespace {

struct CommonOpts {
  std::string config_path;
  std::string out;
  long seed = -1;
  long ensemble = -1;
  std::string sweep;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("config", o.config_path, "flat key = value config file");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "override the master seed");
  sub->add_option("--ensemble", o.ensemble, "override the ensemble size");
  sub->add_option("--sweep", o.sweep, "override sweep_n, e.g. 64,256,1024");
}

Config load(const CommonOpts& o) {
  Config cfg;
  if (!o.config_path.empty()) cfg = Config::from_file(o.config_path);
  if (!o.out.empty()) cfg.set("out", o.out);
  if (o.seed >= 0) cfg.set_long("seed", o.seed);
  if (o.ensemble >= 0) cfg.set_long("ensemble", o.ensemble);
  if (!o.sweep.empty()) cfg.set("sweep_n", o.sweep);
  return cfg;
}

int finish(const Report& report, const Config& cfg) {
  report.write(cfg.get_str("out"));
  for (const auto& [name, f] : report.flags()) {
    std::cout << (f.applicable ? (f.pass ? "[pass] " : "[FAIL] ") : "[ n/a] ") << name << ": "
              << f.detail << "\n";
  }
  std::cout << (report.overall_pass() ? "result: pass" : "result: FAIL") << " (report in "
            << cfg.get_str("out") << ")\n";
  return report.overall_pass() ? 0 : 2;
}

int run_simulate(const Config& cfg_in) {
  Config cfg = cfg_in;
  auto def = [&cfg](const std::string& k, const std::string& v) {
    if (!cfg.has(k)) cfg.set(k, v);
  };
  def("experiment", "simulate");
  def("seed", "20250801");
  def("out", "out/simulate");
  def("beta", "1");
  def("gamma", "0.5");
  def("lambda", "1");
  def("mode", "nonlinear");
  def("n", "64");
  def("horizon_mft", "2");

  const std::size_t n = static_cast<std::size_t>(cfg.get_long("n"));
  const double gamma = cfg.get_double("gamma");
  const double lambda = cfg.get_double("lambda");
  const double beta = cfg.get_double("beta");
  const ScalingMode mode =
      cfg.get_str("mode") == "linear" ? ScalingMode::LinearBG : ScalingMode::NonlinearBG;
  const ScalingParams scaling = make_scaling(n, gamma, lambda, mode);
  const KineticParams eff{beta, scaling.gamma_effective()};
  const double horizon = cfg.get_double("horizon_mft") * boltz::mean_free_time(eff);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_long("seed"));

  RandomStream rng(seed);
  const md::PhasePoint init = ens::sample_equilibrium(scaling, beta, rng);
  md::EventLog log;
  const md::PhasePoint fin = md::evolve(init, horizon, TorusGeometry{lambda}, &log);

  namespace fs = std::filesystem;
  const fs::path dir(cfg.get_str("out"));
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "checkpoint_initial.csv", std::ios::binary);
    md::write_checkpoint(os, init, lambda, seed);
  }
  {
    std::ofstream os(dir / "checkpoint_final.csv", std::ios::binary);
    md::write_checkpoint(os, fin, lambda, seed);
  }
  {
    std::ofstream os(dir / "trajectory.csv", std::ios::binary);
    md::write_trajectory(os, log);
  }
  std::cout << "simulated N=" << n << " to t=" << horizon << " (" << log.size()
            << " collisions); output in " << dir.string() << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"kinetic-theory limits laboratory"};
  app.require_subcommand(1);

  struct SubSpec {
    const char* name;
    const char* blurb;
    std::function<Report(const Config&)> runner;
  };
  const SubSpec specs[] = {
      {"lanford", "hard-sphere ensembles vs the DSMC reference over an N-sweep", run_lanford},
      {"linear", "tagged-particle ensembles vs the jump-process reference", run_linear},
      {"diffusion", "D triangulation plus the diffusive-rescaling sweep", run_diffusion},
      {"reversal", "velocity-reversal / H-return experiment", run_reversal},
      {"collstats", "recollision and pruning statistics", run_collision_stats},
      {"dcoeff", "diffusion coefficient triangulation only", run_dcoeff},
  };

  CommonOpts opts[6];
  CLI::App* subs[6];
  for (int i = 0; i < 6; ++i) {
    subs[i] = app.add_subcommand(specs[i].name, specs[i].blurb);
    add_common(subs[i], opts[i]);
  }

  CommonOpts sim_opts;
  double dc_beta = -1.0, dc_gamma = -1.0;
  CLI::App* sim = app.add_subcommand("simulate", "single hard-sphere run with CSV dumps");
  add_common(sim, sim_opts);
  subs[5]->add_option("--beta", dc_beta, "inverse temperature");
  subs[5]->add_option("--gamma", dc_gamma, "collision-rate constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return run_simulate(load(sim_opts));
    for (int i = 0; i < 6; ++i) {
      if (!subs[i]->parsed()) continue;
      Config cfg = load(opts[i]);
      if (i == 5) {  // dcoeff direct flags
        if (dc_beta > 0) cfg.set_double("beta", dc_beta);
        if (dc_gamma > 0) cfg.set_double("gamma", dc_gamma);
      }
      cfg = with_defaults(cfg, specs[i].name);
      const Report report = specs[i].runner(cfg);
      if (i == 5)
        std::cout << "D_fredholm = " << report.metric("d_fredholm")
                  << "  D_green_kubo = " << report.metric("d_green_kubo")
                  << "  D_msd = " << report.metric("d_msd") << "\n";
      return finish(report, cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace kinlab::expt
