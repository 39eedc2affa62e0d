#pragma once

#include <cstddef>
#include <vector>

#include "heatsrc/geometry.hpp"

namespace heatsrc {

struct PointSource {
  Point2 location;
  double intensity = 1.0;

  friend bool operator==(const PointSource&, const PointSource&) = default;
};

/// A finite weighted sum of Dirac sources, sum_i w_i delta_{x_i}.
struct PointSourceSet {
  std::vector<PointSource> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws ConfigError on duplicate locations or non-finite intensities.
  void validate() const;
  PointSourceSet scaled(double factor) const;
};

/// Node-weight vector of a set on a mesh; off-mesh points snap to the nearest node.
std::vector<double> node_weights(const PointSourceSet& set, const Mesh& mesh);

}  // namespace heatsrc
