#include "heatsrc/data.hpp"

#include <cmath>

#include "heatsrc/errors.hpp"
#include "heatsrc/rng.hpp"

namespace heatsrc {

FluxData generate_data(const FluxVector& clean, const ObservationPlan& plan, double delta,
                       std::uint64_t seed, NoiseNorm norm) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("noise level must be >= 0");
  if (clean.size() != static_cast<Eigen::Index>(plan.obs_count())) {
    throw ConfigError("clean flux length does not match the observation plan");
  }
  const double l2 = clean.norm();
  if (delta > 0.0 && l2 == 0.0) {
    throw ConfigError("relative noise is undefined for a zero signal");
  }
  FluxData out;
  out.plan = plan;
  out.clean = clean;
  const double magnitude =
      norm == NoiseNorm::kRms ? l2 / std::sqrt(static_cast<double>(clean.size())) : l2;
  out.sigma_noise = delta * magnitude;
  out.g = clean;
  if (out.sigma_noise > 0.0) {
    Rng rng = Rng::stream(seed, StreamPurpose::kNoise);
    for (Eigen::Index i = 0; i < out.g.size(); ++i) out.g[i] += out.sigma_noise * rng.normal();
  }
  return out;
}

FluxData generate_data(const PointSourceSet& truth, const ObservationPlan& plan, double delta,
                       std::uint64_t seed, NoiseNorm norm, int modes) {
  truth.validate();
  return generate_data(forward_flux(truth, plan, modes), plan, delta, seed, norm);
}

}  // namespace heatsrc
