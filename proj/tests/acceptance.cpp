#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "kinlab/boltz/dsmc.hpp"
#include "kinlab/boltz/entropy.hpp"
#include "kinlab/boltz/frequency.hpp"
#include "kinlab/diffusion/fredholm.hpp"
#include "kinlab/ensemble/histogram.hpp"
#include "kinlab/ensemble/samplers.hpp"
#include "kinlab/expt/experiments.hpp"
#include "kinlab/md/collision.hpp"
#include "kinlab/md/simulator.hpp"

using namespace kinlab;

namespace {

void verdict(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %d] %s - %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("criterion-1") {
  TEST_CASE("collision law: conservation and involution over 1e6 draws") {
    RandomStream rng(2025);
    double worst_p = 0.0, worst_e = 0.0, worst_restore = 0.0;
    for (int it = 0; it < 1'000'000; ++it) {
      const Vec3 vi = 2.0 * rng.normal3(), vj = 2.0 * rng.normal3();
      const Vec3 n = rng.unit_sphere();
      const auto [a, b] = md::apply_collision(vi, vj, n);
      worst_p = std::fmax(worst_p, norm(a + b - vi - vj));
      worst_e = std::fmax(worst_e, std::fabs(norm2(a) + norm2(b) - norm2(vi) - norm2(vj)));
      const auto [a2, b2] = md::apply_collision(a, b, n);
      worst_restore = std::fmax(worst_restore, std::fmax(norm(a2 - vi), norm(b2 - vj)));
    }
    const bool pass = worst_p <= 1e-12 && worst_e <= 1e-12 && worst_restore <= 1e-12;
    CHECK(worst_p <= 1e-12);
    CHECK(worst_e <= 1e-12);
    CHECK(worst_restore <= 1e-12);
    verdict(1, pass,
            "max |dP| = " + fmt(worst_p) + ", max |dE| = " + fmt(worst_e) +
                ", max double-apply residual = " + fmt(worst_restore) + " (tol 1e-12)");
  }
}

TEST_SUITE("criterion-2") {
  TEST_CASE("event-driven flow: energy, non-overlap, reversal round trip") {
    const double gamma = 0.5, beta = 1.0, lambda = 1.0;
    const ScalingParams scaling = make_scaling(32, gamma, lambda, ScalingMode::NonlinearBG);
    REQUIRE(scaling.packing_fraction() <= 0.05);
    const TorusGeometry geom{lambda};
    const KineticParams eff{beta, scaling.gamma_effective()};
    const double tau = boltz::mean_free_time(eff);

    RandomStream rng(7101);
    const md::PhasePoint init = ens::sample_equilibrium(scaling, beta, rng);
    const double e0 = md::total_kinetic_energy(init);

    md::EventDrivenSim sim(init, geom);
    double min_dist = 1e300;
    double max_drift = 0.0;
    const int n_checks = 25;
    for (int k = 0; k < n_checks; ++k) {
      sim.advance(tau / n_checks);
      const md::PhasePoint s = sim.state();
      max_drift = std::fmax(max_drift, std::fabs(md::total_kinetic_energy(s) - e0));
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j)
          min_dist = std::fmin(min_dist, geom.distance(s.pos[i], s.pos[j]));
    }
    const bool energy_ok = max_drift <= 1e-9;
    const bool overlap_ok = min_dist >= 2.0 * scaling.radius - 1e-9;

    // reversal round trip from the 1-mean-free-time state
    sim.reverse_velocities();
    sim.advance(tau);
    md::PhasePoint back = sim.state();
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
      err = std::fmax(err, norm(geom.displacement(back.pos[i], init.pos[i])));
      err = std::fmax(err, norm(back.vel[i] + init.vel[i]));
    }
    const bool reverse_ok = err <= 1e-6;

    CHECK(energy_ok);
    CHECK(overlap_ok);
    CHECK(reverse_ok);
    verdict(2, energy_ok && overlap_ok && reverse_ok,
            "energy drift " + fmt(max_drift) + " (tol 1e-9), min distance - 2r = " +
                fmt(min_dist - 2.0 * scaling.radius) + " (tol -1e-9), reversal sup error " +
                fmt(err) + " (tol 1e-6)");
  }
}

TEST_SUITE("criterion-3") {
  TEST_CASE("equilibrium stationarity over 5 mean free times") {
    const double gamma = 0.5, beta = 1.0, lambda = 1.0;
    const std::size_t n = 200, runs = 200;
    const ScalingParams scaling = make_scaling(n, gamma, lambda, ScalingMode::NonlinearBG);
    const KineticParams eff{beta, scaling.gamma_effective()};
    const double horizon = 5.0 / boltz::mean_collision_rate(eff);
    const TorusGeometry geom{lambda};

    const ens::GridSpec grid{1, 16, 4.0 / std::sqrt(beta)};
    std::vector<std::vector<Vec3>> init_vels(runs), final_vels(runs);
    RandomStream master(880001);
    for (std::size_t r = 0; r < runs; ++r) {
      RandomStream rng = master.derive(r);
      const md::PhasePoint init = ens::sample_equilibrium(scaling, beta, rng);
      init_vels[r] = init.vel;
      final_vels[r] = md::evolve(init, horizon, geom).vel;
    }

    auto pooled = [&](const std::vector<std::vector<Vec3>>& vels) {
      ens::MarginalAccumulator acc(1, grid, lambda);
      for (const auto& run : vels)
        for (const auto& v : run) acc.add({0.5, 0.5, 0.5}, v);
      return acc.finish();
    };
    const double l1 = ens::l1_distance(pooled(init_vels), pooled(final_vels));

    // noise floor: run-level bootstrap of two independent pooled histograms
    RandomStream brng(880002);
    double floor = 0.0;
    const int n_boot = 30;
    for (int b = 0; b < n_boot; ++b) {
      std::vector<std::vector<Vec3>> ha, hb;
      for (std::size_t r = 0; r < runs; ++r) {
        ha.push_back(init_vels[brng.below(runs)]);
        hb.push_back(init_vels[brng.below(runs)]);
      }
      floor += ens::l1_distance(pooled(ha), pooled(hb));
    }
    floor /= n_boot;

    const bool pass = l1 <= 2.0 * floor;
    CHECK(pass);
    verdict(3, pass,
            "L1(init, final) = " + fmt(l1) + " vs 2x bootstrap floor " + fmt(2.0 * floor) +
                " (" + std::to_string(runs) + " runs, N = " + std::to_string(n) + ")");
  }
}

TEST_SUITE("criterion-4") {
  TEST_CASE("H-theorem: DSMC two-beam relaxation") {
    const double beta_eq = 3.0;  // |u| = 1 beams carry energy 1 = 3/beta_eq
    ens::DensitySpec spec;
    spec.beta = 1.0;
    spec.vlaw = ens::VelocityLaw::two_beam({1, 0, 0}, 0.0);
    RandomStream rng(314159);
    boltz::DistributionState st = boltz::make_dsmc_state(spec, 100'000, 1.0, 1.0, 0, rng);
    const double tau = boltz::mean_free_time({beta_eq, 1.0});
    const double dt = 0.1 * tau;
    const ens::GridSpec grid{1, 24, 4.0 / std::sqrt(beta_eq)};

    auto h_now = [&](const boltz::DistributionState& s) {
      ens::MarginalAccumulator acc(1, grid, 1.0);
      for (std::size_t i = 0; i < s.size(); ++i) acc.add(s.pos[i], s.vel[i]);
      return boltz::h_estimate(acc.finish());
    };

    std::vector<boltz::HEstimate> series{h_now(st)};
    for (int step = 0; step < 100; ++step) {
      st = boltz::dsmc_step(st, dt, rng);
      series.push_back(h_now(st));
    }
    bool monotone = true;
    double worst_increase = -1e300;
    for (std::size_t k = 1; k < series.size(); ++k) {
      const double inc = series[k].value - series[k - 1].value;
      const double sigma = 3.0 * std::sqrt(series[k].stderr_ * series[k].stderr_ +
                                           series[k - 1].stderr_ * series[k - 1].stderr_);
      worst_increase = std::fmax(worst_increase, inc - sigma);
      if (inc > sigma) monotone = false;
    }
    const double h_eq = boltz::h_maxwellian(beta_eq);
    const double terminal_gap = std::fabs(series.back().value - h_eq) / std::fabs(h_eq);
    const bool terminal_ok = terminal_gap <= 0.02;

    CHECK(monotone);
    CHECK(terminal_ok);
    verdict(4, monotone && terminal_ok,
            "worst (increase - 3 sigma) = " + fmt(worst_increase) + ", terminal H = " +
                fmt(series.back().value) + " vs closed form " + fmt(h_eq) + " (gap " +
                fmt(100.0 * terminal_gap) + "%, tol 2%)");
  }
}

TEST_SUITE("criterion-5") {
  TEST_CASE("diffusion coefficient triangulation") {
    expt::Config cfg;
    cfg.set("experiment", "dcoeff");
    cfg.set_double("beta", 8.0 * kPi);
    cfg.set_double("gamma", 1.0);
    cfg.set_long("seed", 550001);
    const expt::Report rep = expt::run_dcoeff(cfg);

    const double d_f = rep.metric("d_fredholm");
    const double d_gk = rep.metric("d_green_kubo");
    const double d_msd = rep.metric("d_msd");
    const double ratio = rep.metric("d_gamma_scaling_ratio");
    const bool gk_ok = std::fabs(d_f - d_gk) / d_f <= 0.05;
    const bool msd_ok = std::fabs(d_msd - d_f) / d_f <= 0.10;
    const bool ratio_ok = std::fabs(ratio - 0.5) <= 1e-3;
    CHECK(gk_ok);
    CHECK(msd_ok);
    CHECK(ratio_ok);
    verdict(5, gk_ok && msd_ok && ratio_ok,
            "D_F = " + fmt(d_f) + ", D_GK = " + fmt(d_gk) + " (gap " +
                fmt(100.0 * std::fabs(d_f - d_gk) / d_f) + "%, tol 5%), D_MSD = " + fmt(d_msd) +
                " (gap " + fmt(100.0 * std::fabs(d_msd - d_f) / d_f) +
                "%, tol 10%), D(2g)/D(g) = " + fmt(ratio) + " (tol 0.5 +- 1e-3)");
  }
}

TEST_SUITE("criterion-6") {
  TEST_CASE("diffusive rescaling error decays ~ 1/lambda") {
    expt::Config cfg;
    cfg.set("experiment", "diffusion");
    cfg.set_long("seed", 660001);
    const expt::Report rep = expt::run_diffusion(cfg);

    bool ratios_ok = false, noise_ok = false;
    std::string detail;
    for (const auto& [name, f] : rep.flags()) {
      if (name == "rescaling_ratios_in_band") {
        ratios_ok = f.pass;
        detail += f.detail;
      }
      if (name == "rescaling_errors_above_noise") noise_ok = f.pass;
    }
    CHECK(ratios_ok);
    CHECK(noise_ok);
    verdict(6, ratios_ok && noise_ok,
            "ratio band [0.3, 0.8]: " + detail + "; every error >= 3x its noise floor: " +
                (noise_ok ? "yes" : "no"));
  }
}

TEST_SUITE("criterion-7") {
  TEST_CASE("linear trend: tagged MD vs jump process, plus the band monitor") {
    expt::Config cfg;
    cfg.set("experiment", "linear");
    cfg.set_long("seed", 770001);
    const expt::Report rep = expt::run_linear(cfg);
    bool trend = false, band = false;
    std::string detail;
    for (const auto& [name, f] : rep.flags()) {
      if (name == "linear_sup_nonincreasing") {
        trend = f.pass;
        detail = f.detail;
      }
      if (name == "max_principle_band") band = f.pass;
    }
    CHECK(trend);
    CHECK(band);
    verdict(7, trend && band,
            "sup discrepancy over N: " + detail + "; band violations beyond 3 sigma: " +
                (band ? "none" : "present"));
  }
}

TEST_SUITE("criterion-8") {
  TEST_CASE("recollision fraction decreases; pruning exceedance decays in k") {
    expt::Config cfg;
    cfg.set("experiment", "collstats");
    cfg.set_long("seed", 881234);
    const expt::Report rep = expt::run_collision_stats(cfg);
    bool rec = false, prune = false, rate = false;
    std::string detail;
    for (const auto& [name, f] : rep.flags()) {
      if (name == "recollision_fraction_decreasing") {
        rec = f.pass;
        detail = f.detail;
      }
      if (name == "pruning_exceedance_decreasing") prune = f.pass;
      if (name == "mean_rate_within_10pct") rate = f.pass;
    }
    CHECK(rec);
    CHECK(prune);
    CHECK(rate);
    verdict(8, rec && prune && rate,
            "recollision fractions " + detail + "; exceedance fractions nonincreasing: " +
                (prune ? "yes" : "no") + "; rate within 10%: " + (rate ? "yes" : "no"));
  }
}

TEST_SUITE("criterion-9") {
  TEST_CASE("irreversibility: microscopic H returns, DSMC H keeps falling") {
    expt::Config cfg;
    cfg.set("experiment", "reversal");
    cfg.set_long("seed", 990001);
    const expt::Report rep = expt::run_reversal(cfg);
    bool micro_h = false, micro_state = false, dsmc = false;
    std::string detail;
    for (const auto& [name, f] : rep.flags()) {
      if (name == "micro_h_returns") {
        micro_h = f.pass;
        detail = f.detail;
      }
      if (name == "micro_state_returns") micro_state = f.pass;
      if (name == "dsmc_h_decreases_after_reflection") dsmc = f.pass;
    }
    CHECK(micro_h);
    CHECK(micro_state);
    CHECK(dsmc);
    verdict(9, micro_h && micro_state && dsmc,
            "micro " + detail + "; state return <= 1e-6: " + (micro_state ? "yes" : "no") +
                "; DSMC H drop >= 3 sigma after reflection: " + (dsmc ? "yes" : "no"));
  }
}

TEST_SUITE("criterion-10") {
  TEST_CASE("determinism: identical config and seed give byte-identical CSVs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "kinlab_acceptance_det";
    fs::remove_all(dir);

    expt::Config cfg;
    cfg.set("experiment", "collstats");
    cfg.set("sweep_n", "64,256");
    cfg.set_long("ensemble", 150);
    cfg.set_long("seed", 1010101);

    cfg.set("out", (dir / "a").string());
    expt::run_collision_stats(cfg).write((dir / "a").string());
    cfg.set("out", (dir / "b").string());
    expt::run_collision_stats(cfg).write((dir / "b").string());

    const bool stats_same = slurp(dir / "a" / "collstats.csv") == slurp(dir / "b" / "collstats.csv");
    const bool prune_same = slurp(dir / "a" / "pruning.csv") == slurp(dir / "b" / "pruning.csv");
    const bool nonempty = !slurp(dir / "a" / "collstats.csv").empty();
    CHECK(stats_same);
    CHECK(prune_same);
    CHECK(nonempty);
    verdict(10, stats_same && prune_same && nonempty,
            std::string("collstats.csv and pruning.csv byte-identical across reruns: ") +
                (stats_same && prune_same ? "yes" : "no"));
    fs::remove_all(dir);
  }
}
