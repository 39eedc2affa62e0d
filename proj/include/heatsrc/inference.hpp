#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "heatsrc/forward.hpp"
#include "heatsrc/geometry.hpp"
#include "heatsrc/levelset.hpp"
#include "heatsrc/prior.hpp"
#include "heatsrc/rng.hpp"
#include "heatsrc/sources.hpp"

namespace heatsrc {

/// Additive Gaussian noise with covariance sigma^2 I.
struct NoiseModel {
  double sigma = 1.0;

  void validate() const;
};

struct PosteriorEval {
  double potential = 0.0;     // |K f - g|^2 / (2 sigma^2)
  double data_misfit = 0.0;   // |K f - g| / |g|
};

PosteriorEval potential(const FluxVector& predicted, const FluxVector& g, const NoiseModel& noise);
PosteriorEval potential(const PointSourceSet& f, const ObservationMatrix& A, const Mesh& mesh,
                        const FluxVector& g, const NoiseModel& noise);

/// min{1, exp(current - proposed)}; depends on the two potentials only.
double pcn_acceptance_probability(double current_potential, double proposed_potential);

/// Everything the chain conditions on; the references must outlive it.
struct InferenceProblem {
  const Mesh& mesh;
  const ObservationMatrix& forward;
  FluxVector data;
  NoiseModel noise;
  ThresholdSpec threshold;
};

struct TraceEntry {
  int iteration = 0;
  double relative_error = 0.0;  // NaN when no truth is known
  std::size_t source_count = 0;
  double potential = 0.0;
  double acceptance_rate = 0.0;
};

/// Chain state carried across outer iterations. theta and the cached
/// residual/potential always describe threshold_map(phi).
struct ThinningState {
  LevelSetField phi;
  std::vector<std::size_t> active;  // theta as node indices, ascending
  PointSourceSet theta;
  FluxVector residual;              // K(theta) - g
  double potential = 0.0;
  int iteration = 0;
  std::vector<TraceEntry> trace;
};

ThinningState make_state(const InferenceProblem& problem, LevelSetField phi);

/// True if theta, residual and potential match phi (potential to 1e-9 relative).
bool is_consistent(const ThinningState& state, const InferenceProblem& problem);

/// One pCN move on phi; returns whether the proposal was accepted.
/// `temperature` divides the potential difference (1 = the untempered chain).
bool pcn_step(ThinningState& state, double beta, PriorSampler& prior, Rng& accept_rng,
              const InferenceProblem& problem, double temperature = 1.0);

/// Leave-one-out sweep over theta in node-index order. Point j is removed
/// when min{1, exp(Phi(f) - Phi(f without j)) * prior_factor} > U(0,1);
/// removals apply immediately. Returns the number of removed points.
std::size_t thinning_pass(ThinningState& state, const InferenceProblem& problem, Rng& thin_rng,
                          double prior_factor = 1.0, double temperature = 1.0);

struct SamplerConfig {
  double beta = 0.1;
  int pcn_steps = 50;
  int max_iterations = 200;
  bool thinning = true;
  double prior_factor = 1.0;
  /// Optional annealing: the potential is divided by a temperature that
  /// decays geometrically from initial_temperature to 1 over the first
  /// anneal_fraction of the outer iterations. 1 disables it.
  double initial_temperature = 1.0;
  double anneal_fraction = 0.0;
  /// pCN step used at temperature T is min(1, beta * T^exponent).
  double beta_temperature_exponent = 0.0;

  void validate() const;
  double temperature(int iteration) const;
};

/// Alternates pcn_steps pCN moves with one thinning pass, max_iterations
/// times, starting from a prior draw. All randomness derives from `seed`.
/// The trace holds one row per outer iteration, preceded by a row for the
/// initial state (iteration 0).
ThinningState bayesian_thinning_run(const InferenceProblem& problem, const CovarianceSpec& prior,
                                    const SamplerConfig& sampler, std::uint64_t seed,
                                    const std::optional<PointSourceSet>& truth = std::nullopt);

/// |w_est - w_true| / |w_true| over mesh node weights.
double relative_error(const PointSourceSet& estimate, const PointSourceSet& truth,
                      const Mesh& mesh);

}  // namespace heatsrc
