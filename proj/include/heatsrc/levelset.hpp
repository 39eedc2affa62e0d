#pragma once

#include <cstddef>
#include <vector>

#include "heatsrc/geometry.hpp"
#include "heatsrc/prior.hpp"
#include "heatsrc/sources.hpp"

namespace heatsrc {

enum class IntensityVariant {
  kWeighted,  // intensity = phi at the node
  kConstant,  // intensity = 1
};

struct ThresholdSpec {
  double c = 0.3;
  IntensityVariant variant = IntensityVariant::kWeighted;
  /// Thinned nodes are clamped to c - suppress_margin.
  double suppress_margin = 0.01;

  void validate() const;
  double intensity(double phi) const {
    return variant == IntensityVariant::kWeighted ? phi : 1.0;
  }
};

/// Indices of nodes with phi > c, ascending.
std::vector<std::size_t> active_nodes(const LevelSetField& phi, const ThresholdSpec& spec);

/// {(x_i, F(phi_i)) : phi_i > c}, ordered by node index.
PointSourceSet threshold_map(const LevelSetField& phi, const Mesh& mesh, const ThresholdSpec& spec);

/// Sets phi[node] = c - suppress_margin so the node drops out of the
/// superlevel set. Returns false (and leaves phi untouched) if the node was
/// already at or below the threshold.
bool suppress_node(LevelSetField& phi, std::size_t node, const ThresholdSpec& spec);

}  // namespace heatsrc
