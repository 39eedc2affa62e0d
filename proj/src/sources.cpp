#include "heatsrc/sources.hpp"

#include <cmath>

#include "heatsrc/errors.hpp"

namespace heatsrc {

void PointSourceSet::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].intensity)) {
      throw ConfigError("point source intensity must be finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i].location == points[j].location) {
        throw ConfigError("duplicate point source location");
      }
    }
  }
}

PointSourceSet PointSourceSet::scaled(double factor) const {
  PointSourceSet out = *this;
  for (auto& p : out.points) p.intensity *= factor;
  return out;
}

std::vector<double> node_weights(const PointSourceSet& set, const Mesh& mesh) {
  std::vector<double> w(mesh.node_count(), 0.0);
  for (const auto& p : set.points) w[mesh.nearest_index(p.location)] += p.intensity;
  return w;
}

}  // namespace heatsrc
