#include "heatsrc/ppp.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>

#include "heatsrc/errors.hpp"

namespace heatsrc {

IntensityFn IntensityFn::homogeneous(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("intensity must be finite and non-negative");
  }
  return {[lambda](Point2) { return lambda; }, lambda};
}

std::vector<Point2> sample_ppp(const IntensityFn& lambda, const Domain& domain, Rng& rng) {
  domain.validate();
  if (!std::isfinite(lambda.max) || lambda.max < 0.0) {
    throw ConfigError("intensity upper bound must be finite and non-negative");
  }
  std::vector<Point2> out;
  if (lambda.max == 0.0) return out;
  const double a = domain.half_width;
  const auto candidates = rng.poisson(lambda.max * domain.area());
  out.reserve(candidates);
  for (std::uint64_t k = 0; k < candidates; ++k) {
    const Point2 p{a * (2.0 * rng.uniform() - 1.0), a * (2.0 * rng.uniform() - 1.0)};
    const double value = lambda.evaluate(p);
    if (value < 0.0 || value > lambda.max * (1.0 + 1e-12)) {
      throw ConfigError("intensity function exceeds its declared bound");
    }
    if (rng.uniform() * lambda.max < value) out.push_back(p);
  }
  return out;
}

std::vector<Point2> sample_ppp(const IntensityFn& lambda, const Domain& domain,
                               std::uint64_t seed) {
  Rng rng = Rng::stream(seed, StreamPurpose::kPointProcess);
  return sample_ppp(lambda, domain, rng);
}

std::vector<Point2> thin_ppp(std::span<const Point2> points,
                             const std::function<double(Point2)>& retain, Rng& rng) {
  std::vector<Point2> out;
  for (const auto& p : points) {
    const double t = retain(p);
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("retention probability outside [0, 1]");
    if (rng.uniform() < t) out.push_back(p);
  }
  return out;
}

MarkedPointSet mark_ppp(std::span<const Point2> points, const MarkKernel& kernel, Rng& rng) {
  MarkedPointSet out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const double m = kernel(p, rng);
    if (!std::isfinite(m)) throw ConfigError("mark kernel produced a non-finite mark");
    out.push_back({p, m});
  }
  return out;
}

std::vector<Point2> superpose(std::span<const Point2> a, std::span<const Point2> b) {
  std::vector<Point2> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::size_t count_in(std::span<const Point2> points, const Rect& region) {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(), [&](const Point2& p) { return region.contains(p); }));
}

PoissonFit poisson_goodness_of_fit(std::span<const std::size_t> counts, double mean) {
  if (counts.empty() || !(mean > 0.0)) throw ConfigError("goodness of fit needs data and mean > 0");
  const double n = static_cast<double>(counts.size());
  const boost::math::poisson_distribution<double> law(mean);

  // Bin edges: [0, lo], lo+1, ..., hi-1, [hi, inf), each with expectation >= 5.
  std::size_t lo = 0;
  while (n * boost::math::cdf(law, static_cast<double>(lo)) < 5.0) ++lo;
  std::size_t hi = lo + 1;
  while (n * boost::math::cdf(boost::math::complement(law, static_cast<double>(hi))) >= 5.0 &&
         n * boost::math::pdf(law, static_cast<double>(hi)) >= 5.0) {
    ++hi;
  }
  // Last bin collects k >= hi.
  std::vector<double> expected, observed;
  expected.push_back(n * boost::math::cdf(law, static_cast<double>(lo)));
  for (std::size_t k = lo + 1; k < hi; ++k) {
    expected.push_back(n * boost::math::pdf(law, static_cast<double>(k)));
  }
  expected.push_back(n * boost::math::cdf(boost::math::complement(law, static_cast<double>(hi - 1))));
  observed.assign(expected.size(), 0.0);
  for (std::size_t c : counts) {
    std::size_t bin = c <= lo ? 0 : (c >= hi ? expected.size() - 1 : c - lo);
    observed[bin] += 1.0;
  }

  PoissonFit fit;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = observed[i] - expected[i];
    fit.statistic += d * d / expected[i];
  }
  fit.dof = static_cast<int>(expected.size()) - 1;
  if (fit.dof < 1) return fit;
  const boost::math::chi_squared_distribution<double> chi(fit.dof);
  fit.p_value = boost::math::cdf(boost::math::complement(chi, fit.statistic));
  return fit;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ConfigError("correlation needs paired samples");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace heatsrc
