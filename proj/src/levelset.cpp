#include "heatsrc/levelset.hpp"

#include <cmath>
#include <iostream>

#include "heatsrc/errors.hpp"

namespace heatsrc {

void ThresholdSpec::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("threshold c must be positive");
  if (!(suppress_margin > 0.0)) throw ConfigError("suppress margin must be positive");
}

std::vector<std::size_t> active_nodes(const LevelSetField& phi, const ThresholdSpec& spec) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (phi[i] > spec.c) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

PointSourceSet threshold_map(const LevelSetField& phi, const Mesh& mesh,
                             const ThresholdSpec& spec) {
  if (static_cast<std::size_t>(phi.size()) != mesh.node_count()) {
    throw ConfigError("level-set field length does not match the mesh");
  }
  PointSourceSet out;
  for (std::size_t i : active_nodes(phi, spec)) {
    out.points.push_back({mesh.node(i), spec.intensity(phi[static_cast<Eigen::Index>(i)])});
  }
  return out;
}

bool suppress_node(LevelSetField& phi, std::size_t node, const ThresholdSpec& spec) {
  auto& v = phi[static_cast<Eigen::Index>(node)];
  if (!(v > spec.c)) {
    std::clog << "warning: suppress_node on node " << node << " which is already below c\n";
    return false;
  }
  v = spec.c - spec.suppress_margin;
  return true;
}

}  // namespace heatsrc
