#pragma once

#include <cstdint>

#include "heatsrc/forward.hpp"
#include "heatsrc/geometry.hpp"
#include "heatsrc/sources.hpp"

namespace heatsrc {

/// How |K(f)| in the relative noise model is read.
enum class NoiseNorm {
  kRms,        // per-component std = delta * rms(K f)
  kEuclidean,  // per-component std = delta * |K f|_2
};

/// Observed data g = K(f) + sigma xi, with the sigma used to generate it.
struct FluxData {
  FluxVector g;
  FluxVector clean;  // K(truth), kept for diagnostics
  double sigma_noise = 0.0;
  ObservationPlan plan;
};

/// Synthetic data with relative Gaussian noise of level delta. Noise draws
/// come from the seed's dedicated noise stream. Throws ConfigError if the
/// signal is zero while delta > 0.
FluxData generate_data(const FluxVector& clean, const ObservationPlan& plan, double delta,
                       std::uint64_t seed, NoiseNorm norm = NoiseNorm::kRms);

FluxData generate_data(const PointSourceSet& truth, const ObservationPlan& plan, double delta,
                       std::uint64_t seed, NoiseNorm norm = NoiseNorm::kRms,
                       int modes = kDefaultModes);

}  // namespace heatsrc
