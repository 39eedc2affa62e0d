#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "heatsrc/geometry.hpp"
#include "heatsrc/rng.hpp"

namespace heatsrc {

/// Intensity function lambda(x) with a known upper bound over the domain.
struct IntensityFn {
  std::function<double(Point2)> evaluate;
  double max = 0.0;

  static IntensityFn homogeneous(double lambda);
};

struct MarkedPoint {
  Point2 location;
  double mark = 0.0;
};

using MarkedPointSet = std::vector<MarkedPoint>;

/// Poisson point process on the domain by rejection from lambda.max:
/// K ~ Poisson(max * |domain|) uniform candidates, each kept with
/// probability lambda(x) / max.
std::vector<Point2> sample_ppp(const IntensityFn& lambda, const Domain& domain, Rng& rng);
std::vector<Point2> sample_ppp(const IntensityFn& lambda, const Domain& domain,
                               std::uint64_t seed);

/// Independent thinning; each point survives with probability retain(x).
/// Throws ConfigError if retain(x) leaves [0, 1].
std::vector<Point2> thin_ppp(std::span<const Point2> points,
                             const std::function<double(Point2)>& retain, Rng& rng);

/// Draws a mark for a point given its location.
using MarkKernel = std::function<double(Point2, Rng&)>;

MarkedPointSet mark_ppp(std::span<const Point2> points, const MarkKernel& kernel, Rng& rng);

std::vector<Point2> superpose(std::span<const Point2> a, std::span<const Point2> b);

/// Axis-aligned rectangle [x0, x1) x [y0, y1).
struct Rect {
  double x0, x1, y0, y1;

  bool contains(Point2 p) const { return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1; }
  double area() const { return (x1 - x0) * (y1 - y0); }
};

std::size_t count_in(std::span<const Point2> points, const Rect& region);

/// Chi-square goodness of fit of observed counts against Poisson(mean).
/// Tail bins are pooled until every expected frequency is at least 5.
struct PoissonFit {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

PoissonFit poisson_goodness_of_fit(std::span<const std::size_t> counts, double mean);

/// Sample Pearson correlation.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace heatsrc
