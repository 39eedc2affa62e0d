#include "heatsrc/inference.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "heatsrc/errors.hpp"

namespace heatsrc {

void NoiseModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("noise standard deviation must be positive");
  }
}

PosteriorEval potential(const FluxVector& predicted, const FluxVector& g, const NoiseModel& noise) {
  noise.validate();
  if (predicted.size() != g.size()) throw ConfigError("prediction and data lengths differ");
  const double misfit = (predicted - g).squaredNorm();
  const double gnorm = g.norm();
  return {misfit / (2.0 * noise.sigma * noise.sigma),
          gnorm > 0.0 ? std::sqrt(misfit) / gnorm : std::sqrt(misfit)};
}

PosteriorEval potential(const PointSourceSet& f, const ObservationMatrix& A, const Mesh& mesh,
                        const FluxVector& g, const NoiseModel& noise) {
  return potential(forward_flux(f, A, mesh), g, noise);
}

double pcn_acceptance_probability(double current_potential, double proposed_potential) {
  const double diff = current_potential - proposed_potential;
  return diff >= 0.0 ? 1.0 : std::exp(diff);
}

namespace {

double half_inverse_variance(const InferenceProblem& p) {
  return 0.5 / (p.noise.sigma * p.noise.sigma);
}

void rebuild(ThinningState& s, const InferenceProblem& p) {
  s.active = active_nodes(s.phi, p.threshold);
  s.theta = threshold_map(s.phi, p.mesh, p.threshold);
  s.residual = -p.data;
  for (std::size_t k = 0; k < s.active.size(); ++k) {
    s.residual += s.theta.points[k].intensity *
                  p.forward.column(static_cast<Eigen::Index>(s.active[k]));
  }
  s.potential = s.residual.squaredNorm() * half_inverse_variance(p);
}

/// Potential of threshold_map(phi) without materializing the source set.
double field_potential(const LevelSetField& phi, const InferenceProblem& p, FluxVector& work) {
  work = -p.data;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (phi[i] > p.threshold.c) work += p.threshold.intensity(phi[i]) * p.forward.column(i);
  }
  return work.squaredNorm() * half_inverse_variance(p);
}

}  // namespace

ThinningState make_state(const InferenceProblem& problem, LevelSetField phi) {
  problem.noise.validate();
  problem.threshold.validate();
  if (static_cast<std::size_t>(phi.size()) != problem.mesh.node_count() ||
      problem.forward.node_count() != phi.size() ||
      problem.forward.obs_count() != problem.data.size()) {
    throw ConfigError("inference problem dimensions disagree");
  }
  ThinningState s;
  s.phi = std::move(phi);
  rebuild(s, problem);
  return s;
}

bool is_consistent(const ThinningState& state, const InferenceProblem& problem) {
  ThinningState fresh;
  fresh.phi = state.phi;
  rebuild(fresh, problem);
  if (fresh.active != state.active || fresh.theta.points != state.theta.points) return false;
  const double scale = std::max(1.0, std::abs(fresh.potential));
  return std::abs(fresh.potential - state.potential) <= 1e-9 * scale;
}

bool pcn_step(ThinningState& state, double beta, PriorSampler& prior, Rng& accept_rng,
              const InferenceProblem& problem, double temperature) {
  LevelSetField proposal = pcn_propose(state.phi, beta, prior);
  FluxVector work;
  const double proposed = field_potential(proposal, problem, work);
  const double u = accept_rng.uniform_open();
  if (u < pcn_acceptance_probability(state.potential / temperature, proposed / temperature)) {
    state.phi = std::move(proposal);
    rebuild(state, problem);
    return true;
  }
  return false;
}

std::size_t thinning_pass(ThinningState& state, const InferenceProblem& problem, Rng& thin_rng,
                          double prior_factor, double temperature) {
  if (!(temperature >= 1.0)) throw ConfigError("temperature must be >= 1");
  if (!(prior_factor > 0.0)) throw ConfigError("thinning prior factor must be positive");
  if (state.active.empty()) return 0;
  const double scale = half_inverse_variance(problem);
  const std::vector<std::size_t> candidates = state.active;
  std::size_t removed = 0;
  for (std::size_t node : candidates) {
    const auto col = static_cast<Eigen::Index>(node);
    const double weight = problem.threshold.intensity(state.phi[col]);
    const FluxVector without = state.residual - weight * problem.forward.column(col);
    const double loo_potential = without.squaredNorm() * scale;
    const double alpha =
        std::min(1.0, std::exp((state.potential - loo_potential) / temperature) * prior_factor);
    if (alpha > thin_rng.uniform()) {
      suppress_node(state.phi, node, problem.threshold);
      state.residual = without;
      state.potential = loo_potential;
      ++removed;
    }
  }
  if (removed > 0) rebuild(state, problem);
  assert(is_consistent(state, problem));
  return removed;
}

void SamplerConfig::validate() const {
  validate_pcn_beta(beta);
  if (pcn_steps < 0) throw ConfigError("pcn_steps must be non-negative");
  if (max_iterations < 0) throw ConfigError("max_iterations must be non-negative");
  if (!(prior_factor > 0.0)) throw ConfigError("thinning prior factor must be positive");
  if (!(initial_temperature >= 1.0)) throw ConfigError("initial temperature must be >= 1");
  if (!(beta_temperature_exponent >= 0.0) || !std::isfinite(beta_temperature_exponent)) {
    throw ConfigError("beta temperature exponent must be finite and >= 0");
  }
  if (!(anneal_fraction >= 0.0 && anneal_fraction <= 1.0)) {
    throw ConfigError("anneal fraction must lie in [0, 1]");
  }
}

double SamplerConfig::temperature(int iteration) const {
  const double span = anneal_fraction * max_iterations;
  if (initial_temperature == 1.0 || !(span > 0.0) || iteration >= span) return 1.0;
  return std::pow(initial_temperature, 1.0 - iteration / span);
}

ThinningState bayesian_thinning_run(const InferenceProblem& problem, const CovarianceSpec& prior_spec,
                                    const SamplerConfig& sampler, std::uint64_t seed,
                                    const std::optional<PointSourceSet>& truth) {
  sampler.validate();
  PriorSampler prior = build_prior(problem.mesh, prior_spec, seed);
  Rng accept_rng = Rng::stream(seed, StreamPurpose::kAccept);
  Rng thin_rng = Rng::stream(seed, StreamPurpose::kThinning);

  const auto error_of = [&](const ThinningState& s) {
    return truth ? relative_error(s.theta, *truth, problem.mesh)
                 : std::numeric_limits<double>::quiet_NaN();
  };

  ThinningState state = make_state(problem, prior.sample());
  state.trace.push_back({0, error_of(state), state.active.size(), state.potential, 0.0});
  for (int n = 1; n <= sampler.max_iterations; ++n) {
    const double temperature = sampler.temperature(n - 1);
    const double step =
        std::min(1.0, sampler.beta * std::pow(temperature, sampler.beta_temperature_exponent));
    int accepted = 0;
    for (int k = 0; k < sampler.pcn_steps; ++k) {
      if (pcn_step(state, step, prior, accept_rng, problem, temperature)) ++accepted;
    }
    assert(is_consistent(state, problem));
    if (sampler.thinning) {
      thinning_pass(state, problem, thin_rng, sampler.prior_factor, temperature);
    }
    state.iteration = n;
    const double rate =
        sampler.pcn_steps > 0 ? static_cast<double>(accepted) / sampler.pcn_steps : 0.0;
    state.trace.push_back({n, error_of(state), state.active.size(), state.potential, rate});
  }
  return state;
}

double relative_error(const PointSourceSet& estimate, const PointSourceSet& truth,
                      const Mesh& mesh) {
  if (truth.empty()) throw ConfigError("relative error needs a non-empty reference");
  const auto west = node_weights(estimate, mesh);
  const auto wtrue = node_weights(truth, mesh);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < west.size(); ++i) {
    num += (west[i] - wtrue[i]) * (west[i] - wtrue[i]);
    den += wtrue[i] * wtrue[i];
  }
  if (den == 0.0) throw ConfigError("relative error reference has zero weight");
  return std::sqrt(num / den);
}

}  // namespace heatsrc
