#include "heatsrc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heatsrc/errors.hpp"

namespace heatsrc {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

void Domain::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ConfigError("domain half_width must be positive and finite");
  }
}

bool Domain::contains(Point2 p) const {
  return std::abs(p.x) < half_width && std::abs(p.y) < half_width;
}

double Domain::boundary_distance(Point2 p) const {
  return half_width - std::max(std::abs(p.x), std::abs(p.y));
}

Mesh::Mesh(Domain domain, double spacing) : domain_(domain), spacing_(spacing) {
  domain_.validate();
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw ConfigError("mesh spacing must be positive");
  }
  const double cells = 2.0 * domain_.half_width / spacing;
  const double rounded = std::round(cells);
  if (rounded < 2.0 || std::abs(cells - rounded) > 1e-9 * rounded) {
    throw ConfigError("mesh spacing " + std::to_string(spacing) +
                      " does not evenly divide the domain width " +
                      std::to_string(2.0 * domain_.half_width));
  }
  per_axis_ = static_cast<std::size_t>(rounded) - 1;
  nodes_.reserve(per_axis_ * per_axis_);
  const double a = domain_.half_width;
  for (std::size_t row = 0; row < per_axis_; ++row) {
    for (std::size_t col = 0; col < per_axis_; ++col) {
      nodes_.push_back({-a + static_cast<double>(col + 1) * spacing_,
                        -a + static_cast<double>(row + 1) * spacing_});
    }
  }
}

std::optional<std::size_t> Mesh::index_of(Point2 p) const {
  const std::size_t k = nearest_index(p);
  if (distance(nodes_[k], p) <= 1e-9 * spacing_) return k;
  return std::nullopt;
}

std::size_t Mesh::nearest_index(Point2 p) const {
  const auto clamp_index = [this](double coord) {
    const double k = std::round((coord + domain_.half_width) / spacing_) - 1.0;
    return static_cast<std::size_t>(
        std::clamp(k, 0.0, static_cast<double>(per_axis_ - 1)));
  };
  return clamp_index(p.y) * per_axis_ + clamp_index(p.x);
}

Mesh build_mesh(const Domain& domain, double spacing) { return Mesh(domain, spacing); }

namespace {

std::vector<double> make_times(const TimeSpec& spec) {
  std::vector<double> times;
  if (const auto* fixed = std::get_if<FixedTime>(&spec)) {
    if (!(fixed->t > 0.0) || !std::isfinite(fixed->t)) {
      throw ConfigError("observation time must be positive");
    }
    times.push_back(fixed->t);
    return times;
  }
  const auto& grid = std::get<UniformTimes>(spec);
  if (!(grid.dt > 0.0) || !(grid.horizon >= grid.dt) || !std::isfinite(grid.horizon)) {
    throw ConfigError("time grid needs 0 < dt <= horizon");
  }
  const double steps = std::round(grid.horizon / grid.dt);
  if (std::abs(steps * grid.dt - grid.horizon) > 1e-9 * grid.horizon) {
    throw ConfigError("time step does not evenly divide the horizon");
  }
  const auto count = static_cast<std::size_t>(steps);
  times.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) times.push_back(static_cast<double>(i) * grid.dt);
  return times;
}

std::optional<Edge> edge_of(const Domain& domain, Point2 p) {
  const double a = domain.half_width;
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * a;
  const bool on_x = std::abs(std::abs(p.x) - a) <= tol;
  const bool on_y = std::abs(std::abs(p.y) - a) <= tol;
  if (on_x == on_y) return std::nullopt;  // interior/exterior, or a corner
  if (on_x) {
    if (std::abs(p.y) >= a) return std::nullopt;
    return p.x > 0 ? Edge::kEast : Edge::kWest;
  }
  if (std::abs(p.x) >= a) return std::nullopt;
  return p.y > 0 ? Edge::kNorth : Edge::kSouth;
}

}  // namespace

void ObservationPlan::validate() const {
  domain.validate();
  if (sensors.empty()) throw ConfigError("observation plan has no sensors");
  if (times.empty()) throw ConfigError("observation plan has no times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw ConfigError("observation times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ConfigError("observation times must be strictly increasing");
    }
  }
  for (const auto& s : sensors) {
    const auto e = edge_of(domain, s.location);
    if (!e || *e != s.edge) throw ConfigError("sensor is not on a boundary edge");
  }
}

ObservationPlan make_observation_plan(const Domain& domain, std::size_t n_sensors,
                                      const TimeSpec& time_spec) {
  domain.validate();
  if (n_sensors == 0) throw ConfigError("at least one sensor is required");
  ObservationPlan plan;
  plan.domain = domain;
  plan.times = make_times(time_spec);
  const double a = domain.half_width;
  for (std::size_t k = 0; k < n_sensors; ++k) {
    // Arc length from the east midpoint, in units of the half width: s in [0, 8).
    const std::size_t num = 8 * k;
    if (num % n_sensors == 0 && (num / n_sensors) % 2 == 1) {
      throw ConfigError(std::to_string(n_sensors) +
                        " equally spaced sensors would put one on a corner");
    }
    const double s = static_cast<double>(num) / static_cast<double>(n_sensors);
    Sensor sensor;
    if (s < 1.0) {
      sensor = {{a, s * a}, Edge::kEast};
    } else if (s < 3.0) {
      sensor = {{(2.0 - s) * a, a}, Edge::kNorth};
    } else if (s < 5.0) {
      sensor = {{-a, (4.0 - s) * a}, Edge::kWest};
    } else if (s < 7.0) {
      sensor = {{(s - 6.0) * a, -a}, Edge::kSouth};
    } else {
      sensor = {{a, (s - 8.0) * a}, Edge::kEast};
    }
    plan.sensors.push_back(sensor);
  }
  plan.validate();
  return plan;
}

ObservationPlan make_observation_plan(const Domain& domain,
                                      const std::vector<Point2>& sensor_locations,
                                      const TimeSpec& time_spec) {
  domain.validate();
  if (sensor_locations.empty()) throw ConfigError("at least one sensor is required");
  ObservationPlan plan;
  plan.domain = domain;
  plan.times = make_times(time_spec);
  for (const auto& p : sensor_locations) {
    const auto e = edge_of(domain, p);
    if (!e) throw ConfigError("sensor location is not on an edge (corners excluded)");
    plan.sensors.push_back({p, *e});
  }
  plan.validate();
  return plan;
}

}  // namespace heatsrc
