// Command-line front end: run and sweep experiment configs, and the two
// standalone self-checks (forward solver vs oracle, point-process laws).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "heatsrc/diagnostics.hpp"
#include "heatsrc/errors.hpp"
#include "heatsrc/experiment.hpp"

namespace fs = std::filesystem;
using namespace heatsrc;

namespace {

struct RunFlags {
  std::string config;
  bool no_thinning = false;
  bool literal_norm = false;
  std::string output_dir;
};

ExperimentConfig configure(const RunFlags& f) {
  ExperimentConfig c = load_experiment_config(f.config);
  if (f.no_thinning) c.sampler.thinning = false;
  if (f.literal_norm) c.noise_norm = NoiseNorm::kEuclidean;
  if (!f.output_dir.empty()) c.output_dir = f.output_dir;
  return c;
}

// Runs one config; with thinning disabled, also runs the thinning reference
// on the same data and seed and records the comparison.
ExperimentReport run_one(const ExperimentConfig& c, const fs::path& dir, bool quiet) {
  ExperimentReport r = run_experiment(c);
  write_outputs(r, dir);
  if (!c.sampler.thinning) {
    ExperimentConfig ref = c;
    ref.sampler.thinning = true;
    const ExperimentReport rr = run_experiment(ref);
    write_outputs(rr, dir / "with_thinning");
    const bool worse = r.final_misfit > rr.final_misfit;
    std::ofstream os(dir / "summary.txt", std::ios::app);
    os << "thinning reference: sources " << rr.final_state.theta.size() << "  relative error "
       << format_number(rr.final_relative_error) << "  data misfit "
       << format_number(rr.final_misfit) << '\n';
    os << "without thinning the final misfit is " << (worse ? "WORSE" : "not worse")
       << " than with thinning\n";
  }
  if (!quiet) {
    std::ifstream in(dir / "summary.txt");
    std::cout << in.rdbuf();
  }
  return r;
}

int cmd_run(const RunFlags& f) {
  const ExperimentConfig c = configure(f);
  run_one(c, c.output_dir, false);
  std::cout << "outputs written to " << c.output_dir.string() << '\n';
  return 0;
}

int cmd_sweep(const RunFlags& f, int seeds) {
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  const ExperimentConfig base = configure(f);
  fs::create_directories(base.output_dir);
  std::ofstream csv(base.output_dir / "sweep.csv");
  csv << "seed,sources,relative_error,data_misfit,potential,exact_positions,covers_truth\n";
  int exact = 0;
  int covers = 0;
  for (int k = 0; k < seeds; ++k) {
    ExperimentConfig c = base;
    c.seed = base.seed + static_cast<std::uint64_t>(k);
    const fs::path dir = base.output_dir / ("seed_" + std::to_string(c.seed));
    const ExperimentReport r = run_one(c, dir, true);
    exact += r.match.exact_positions();
    covers += r.match.covers_truth();
    csv << c.seed << ',' << r.final_state.theta.size() << ','
        << format_number(r.final_relative_error) << ',' << format_number(r.final_misfit) << ','
        << format_number(r.final_state.potential) << ',' << r.match.exact_positions() << ','
        << r.match.covers_truth() << '\n';
    std::printf("seed %llu: %zu sources, relative error %.4f, exact positions %s\n",
                static_cast<unsigned long long>(c.seed), r.final_state.theta.size(),
                r.final_relative_error, r.match.exact_positions() ? "yes" : "no");
  }
  std::printf("exact positions in %d of %d seeds; truth covered in %d of %d\n", exact, seeds,
              covers, seeds);
  return 0;
}

int cmd_verify_forward(int cases, std::uint64_t seed, int grid) {
  const auto checks = verify_forward(static_cast<std::size_t>(cases), seed, grid);
  bool ok = true;
  std::printf("%-18s %-14s %-10s\n", "source", "discrepancy", "ratio");
  for (const auto& c : checks) {
    const bool pass =
        c.discrepancy < 1e-3 && c.convergence_ratio >= 3.0 && c.convergence_ratio <= 5.0;
    ok = ok && pass;
    std::printf("(%6.3f, %6.3f)   %-14.3e %-10.3f %s\n", c.source.x, c.source.y, c.discrepancy,
                c.convergence_ratio, pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

int cmd_ppp(int replications, std::uint64_t seed) {
  const PppDiagnostics d = ppp_diagnostics(static_cast<std::size_t>(replications), seed);
  std::printf("replications        %zu\n", d.replications);
  std::printf("homogeneous count   chi2 %.2f dof %d p %.4f\n", d.homogeneous.statistic,
              d.homogeneous.dof, d.homogeneous.p_value);
  std::printf("thinned count       chi2 %.2f dof %d p %.4f\n", d.thinned.statistic,
              d.thinned.dof, d.thinned.p_value);
  std::printf("superposed count    chi2 %.2f dof %d p %.4f\n", d.superposed.statistic,
              d.superposed.dof, d.superposed.p_value);
  std::printf("kept/removed corr   %.4f\n", d.kept_removed_correlation);
  std::printf("void probability    %.4f (expected %.4f, se %.4f)\n", d.void_empirical,
              d.void_expected, d.void_stderr);
  const bool ok = d.passed();
  std::printf("%s\n", ok ? "all checks passed" : "CHECK FAILED");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point heat source reconstruction from boundary flux data"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto add_run_flags = [](CLI::App* sub, RunFlags& f) {
    sub->add_option("config", f.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--no-thinning", f.no_thinning, "disable the thinning step (runs a thinning reference too)");
    sub->add_flag("--literal-noise-norm", f.literal_norm, "noise std = delta * Euclidean norm of K(f)");
    sub->add_option("--output-dir", f.output_dir, "override the config's output directory");
  };
  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_run_flags(run, run_flags);

  RunFlags sweep_flags;
  int seeds = 10;
  CLI::App* sweep = app.add_subcommand("sweep", "run an experiment over consecutive seeds");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--seeds", seeds, "number of seeds, starting at the config seed");

  int cases = 10;
  std::uint64_t vf_seed = 1;
  int grid = 256;
  CLI::App* vf = app.add_subcommand("verify-forward", "compare the spectral solver with the finite-difference oracle");
  vf->add_option("--cases", cases, "number of random sources");
  vf->add_option("--seed", vf_seed, "seed for the source positions");
  vf->add_option("--grid", grid, "finest oracle grid (cells per side)");

  int replications = 10000;
  std::uint64_t ppp_seed = 1;
  CLI::App* ppp = app.add_subcommand("ppp-diagnostics", "Monte Carlo checks of the point-process sampler");
  ppp->add_option("--replications", replications, "Monte Carlo replications");
  ppp->add_option("--seed", ppp_seed, "root seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags, seeds);
    if (*vf) return cmd_verify_forward(cases, vf_seed, grid);
    if (*ppp) return cmd_ppp(replications, ppp_seed);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
