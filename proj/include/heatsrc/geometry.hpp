#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace heatsrc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

/// The open square (-half_width, half_width)^2.
struct Domain {
  double half_width = 1.0;

  void validate() const;
  bool contains(Point2 p) const;
  /// Distance from an interior point to the nearest edge.
  double boundary_distance(Point2 p) const;
  double area() const { return 4.0 * half_width * half_width; }
};

/// Regular grid of interior nodes, row-major with x varying fastest:
/// index = row * per_axis + col, node = (-a + (col+1) h, -a + (row+1) h).
class Mesh {
 public:
  Mesh(Domain domain, double spacing);

  const Domain& domain() const { return domain_; }
  double spacing() const { return spacing_; }
  std::size_t per_axis() const { return per_axis_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Point2>& nodes() const { return nodes_; }
  Point2 node(std::size_t index) const { return nodes_.at(index); }

  /// Index of the node at exactly this location (up to 1e-9 h), if any.
  std::optional<std::size_t> index_of(Point2 p) const;
  /// Index of the closest node; ties resolve toward the lower index.
  std::size_t nearest_index(Point2 p) const;

 private:
  Domain domain_;
  double spacing_;
  std::size_t per_axis_;
  std::vector<Point2> nodes_;
};

Mesh build_mesh(const Domain& domain, double spacing);

enum class Edge { kEast, kNorth, kWest, kSouth };

struct Sensor {
  Point2 location;
  Edge edge;
};

struct FixedTime {
  double t = 1.0;
};

struct UniformTimes {
  double dt = 0.01;
  double horizon = 1.0;
};

using TimeSpec = std::variant<FixedTime, UniformTimes>;

/// Boundary sensors plus observation instants. Observation vectors are
/// ordered sensor-major: entry s * times.size() + k is sensor s at times[k].
struct ObservationPlan {
  Domain domain;
  std::vector<Sensor> sensors;
  std::vector<double> times;

  std::size_t obs_count() const { return sensors.size() * times.size(); }
  std::size_t index(std::size_t sensor, std::size_t time) const {
    return sensor * times.size() + time;
  }
  void validate() const;
};

/// Sensors equally spaced along the perimeter, counterclockwise from the
/// midpoint of the east edge. A sensor landing on a corner is a ConfigError.
ObservationPlan make_observation_plan(const Domain& domain, std::size_t n_sensors,
                                      const TimeSpec& time_spec);

/// Sensors at explicit locations (each must lie on an edge, off the corners).
ObservationPlan make_observation_plan(const Domain& domain,
                                      const std::vector<Point2>& sensor_locations,
                                      const TimeSpec& time_spec);

}  // namespace heatsrc
