#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "heatsrc/data.hpp"
#include "heatsrc/forward.hpp"
#include "heatsrc/geometry.hpp"
#include "heatsrc/inference.hpp"
#include "heatsrc/levelset.hpp"
#include "heatsrc/prior.hpp"
#include "heatsrc/sources.hpp"

namespace heatsrc {

/// One synthetic reconstruction: geometry, truth, noise, prior and sampler.
/// The JSON schema is documented in configs/README.md.
struct ExperimentConfig {
  std::string name = "experiment";
  Domain domain{1.0};
  double mesh_spacing = 0.125;
  std::size_t sensor_count = 1;
  TimeSpec times = FixedTime{1.0};
  int modes = kDefaultModes;
  PointSourceSet truth;
  double noise_level = 0.01;
  NoiseNorm noise_norm = NoiseNorm::kRms;
  CovarianceSpec prior;
  ThresholdSpec threshold;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // empty: assemble the matrix every run

  /// Throws ConfigError; truth points must sit on interior mesh nodes.
  void validate() const;
};

/// Parses JSON text. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct MatchedPair {
  std::size_t truth_index = 0;
  std::size_t estimate_index = 0;
  double position_error_cells = 0.0;
  double intensity_error = 0.0;  // estimate - truth
};

struct MatchReport {
  std::vector<MatchedPair> pairs;      // ordered by truth index
  std::vector<std::size_t> spurious;   // estimate indices left over
  std::vector<std::size_t> missed;     // truth indices left over

  /// Every truth point matched at distance zero; no spurious points.
  bool exact_positions() const;
  /// exact_positions() and every |intensity error| <= tol.
  bool exact(double intensity_tol) const;
  /// Every truth point matched at distance zero, spurious points allowed.
  bool covers_truth() const;
};

/// Greedy assignment by increasing distance (ties by truth, then estimate
/// index). Pairs farther apart than max_cells mesh cells stay unmatched.
MatchReport match_sources(const PointSourceSet& estimate, const PointSourceSet& truth,
                          double cell_size, double max_cells = 2.0);

struct ExperimentReport {
  ExperimentConfig config;
  FluxData data;
  ThinningState final_state;
  MatchReport match;
  double final_misfit = 0.0;          // |K theta - g| / |g|
  double final_relative_error = 0.0;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Table with exact and reconstructed positions/intensities, one row per
/// matched pair, then spurious and missed points.
std::string format_summary_table(const ExperimentReport& report);

/// Writes trace.csv, estimate.csv, truth.csv, scatter.csv, field.csv,
/// sources.json, summary.json and summary.txt into dir.
void write_outputs(const ExperimentReport& report, const std::filesystem::path& dir);

/// Fixed-format number used in every output file: shortest round-trip form.
std::string format_number(double v);

}  // namespace heatsrc
