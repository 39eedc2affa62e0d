#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "heatsrc/errors.hpp"
#include "heatsrc/ppp.hpp"

using namespace heatsrc;

namespace {

const Domain kSquare{1.0};
const Rect kLeft{-1.0, 0.0, -1.0, 1.0};
const Rect kRight{0.0, 1.0, -1.0, 1.0};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("zero intensity gives no points") {
  Rng rng(1);
  CHECK(sample_ppp(IntensityFn::homogeneous(0.0), kSquare, rng).empty());
  CHECK_THROWS_AS(IntensityFn::homogeneous(-1.0), ConfigError);
}

TEST_CASE("homogeneous counts: mean and independence of disjoint halves") {
  Rng rng(2);
  const int n = 10000;
  std::vector<double> total, left, right;
  for (int r = 0; r < n; ++r) {
    const auto pts = sample_ppp(IntensityFn::homogeneous(5.0), kSquare, rng);
    for (const auto& p : pts) REQUIRE(kSquare.contains(p));
    total.push_back(static_cast<double>(pts.size()));
    left.push_back(static_cast<double>(count_in(pts, kLeft)));
    right.push_back(static_cast<double>(count_in(pts, kRight)));
  }
  CHECK(std::abs(mean_of(total) - 20.0) < 3.0 * std::sqrt(20.0 / n));
  CHECK(std::abs(correlation(left, right)) < 0.03);
}

TEST_CASE("inhomogeneous intensity by rejection") {
  // lambda(x, y) = 4 (x + 1) / 2 integrates to 8 over the square; the left
  // half carries 2 of it.
  const IntensityFn lam{[](Point2 p) { return 2.0 * (p.x + 1.0); }, 4.0};
  Rng rng(3);
  const int n = 10000;
  std::vector<double> total, left;
  for (int r = 0; r < n; ++r) {
    const auto pts = sample_ppp(lam, kSquare, rng);
    total.push_back(static_cast<double>(pts.size()));
    left.push_back(static_cast<double>(count_in(pts, kLeft)));
  }
  CHECK(std::abs(mean_of(total) - 8.0) < 4.0 * std::sqrt(8.0 / n));
  CHECK(std::abs(mean_of(left) - 2.0) < 4.0 * std::sqrt(2.0 / n));
  const IntensityFn bad{[](Point2) { return 5.0; }, 1.0};
  CHECK_THROWS_AS(sample_ppp(bad, kSquare, rng), ConfigError);
}

TEST_CASE("thinning: identity, empty and retained mean") {
  Rng rng(4);
  const auto pts = sample_ppp(IntensityFn::homogeneous(3.0), kSquare, rng);
  CHECK(thin_ppp(pts, [](Point2) { return 1.0; }, rng) == pts);
  CHECK(thin_ppp(pts, [](Point2) { return 0.0; }, rng).empty());
  CHECK_THROWS_AS(thin_ppp(pts, [](Point2) { return 1.5; }, rng), ConfigError);
  CHECK_THROWS_AS(thin_ppp(pts, [](Point2) { return -0.1; }, rng), ConfigError);

  const int n = 10000;
  std::vector<double> kept;
  for (int r = 0; r < n; ++r) {
    const auto all = sample_ppp(IntensityFn::homogeneous(10.0), kSquare, rng);
    kept.push_back(static_cast<double>(thin_ppp(all, [](Point2) { return 0.3; }, rng).size()));
  }
  CHECK(mean_of(kept) == doctest::Approx(12.0).epsilon(0.02));
}

TEST_CASE("marking") {
  Rng rng(5);
  CHECK(mark_ppp(std::vector<Point2>{}, [](Point2, Rng&) { return 1.0; }, rng).empty());
  const auto pts = sample_ppp(IntensityFn::homogeneous(4.0), kSquare, rng);
  const auto unit = mark_ppp(pts, [](Point2, Rng&) { return 1.0; }, rng);
  REQUIRE(unit.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(unit[i].location == pts[i]);
    CHECK(unit[i].mark == 1.0);
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < 1000; ++r) {
    const auto p = sample_ppp(IntensityFn::homogeneous(5.0), kSquare, rng);
    for (const auto& m : mark_ppp(p, [](Point2, Rng& g) { return g.normal(0.5, 0.1); }, rng)) {
      sum += m.mark;
      ++count;
    }
  }
  CHECK(sum / static_cast<double>(count) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("superposition: identity, summed mean and independence") {
  Rng rng(6);
  const auto b = sample_ppp(IntensityFn::homogeneous(2.0), kSquare, rng);
  CHECK(superpose(std::vector<Point2>{}, b) == b);
  const int n = 10000;
  std::vector<double> total, left, right;
  for (int r = 0; r < n; ++r) {
    const auto p = sample_ppp(IntensityFn::homogeneous(2.0), kSquare, rng);
    const auto q = sample_ppp(IntensityFn::homogeneous(3.0), kSquare, rng);
    const auto s = superpose(p, q);
    CHECK(s.size() == p.size() + q.size());
    total.push_back(static_cast<double>(s.size()));
    left.push_back(static_cast<double>(count_in(s, kLeft)));
    right.push_back(static_cast<double>(count_in(s, kRight)));
  }
  CHECK(mean_of(total) == doctest::Approx(20.0).epsilon(0.02));
  CHECK(std::abs(correlation(left, right)) < 0.03);
}

TEST_CASE("void probability of rectangles") {
  Rng rng(7);
  const int n = 10000;
  for (const Rect& a : {Rect{0.0, 0.5, 0.0, 0.5}, Rect{-1.0, -0.5, -1.0, 1.0}}) {
    int voids = 0;
    for (int r = 0; r < n; ++r) {
      if (count_in(sample_ppp(IntensityFn::homogeneous(1.5), kSquare, rng), a) == 0) ++voids;
    }
    const double p = std::exp(-1.5 * a.area());
    CHECK(std::abs(voids / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("chi-square fit matches an independently computed value") {
  // Reference computed with scipy.stats using the same tail pooling.
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < 60; ++i) counts.push_back((i * 7) % 11);
  const PoissonFit fit = poisson_goodness_of_fit(counts, 5.0);
  CHECK(fit.dof == 6);
  CHECK(fit.statistic == doctest::Approx(25.090926274490634).epsilon(1e-12));
  CHECK(fit.p_value == doctest::Approx(0.00032846785343390805).epsilon(1e-9));
  CHECK_THROWS_AS(poisson_goodness_of_fit(std::vector<std::size_t>{}, 1.0), ConfigError);
  CHECK_THROWS_AS(poisson_goodness_of_fit(counts, 0.0), ConfigError);
}

TEST_CASE("chi-square fit separates the right and wrong means") {
  Rng rng(8);
  std::vector<std::size_t> counts;
  for (int r = 0; r < 10000; ++r) counts.push_back(rng.poisson(8.0));
  CHECK(poisson_goodness_of_fit(counts, 8.0).p_value > 0.01);
  CHECK(poisson_goodness_of_fit(counts, 8.5).p_value < 1e-6);
}

TEST_CASE("Poisson variates: mean and variance for small and large means") {
  Rng rng(9);
  for (double mu : {0.5, 8.0, 450.0}) {
    const int n = 20000;
    double s = 0.0, ss = 0.0;
    for (int r = 0; r < n; ++r) {
      const double k = static_cast<double>(rng.poisson(mu));
      s += k;
      ss += k * k;
    }
    const double m = s / n, v = ss / n - m * m;
    CHECK(std::abs(m - mu) < 4.0 * std::sqrt(mu / n));
    CHECK(v == doctest::Approx(mu).epsilon(0.05));
  }
}

TEST_CASE("seeded sampling is reproducible") {
  const auto a = sample_ppp(IntensityFn::homogeneous(3.0), kSquare, std::uint64_t{21});
  const auto b = sample_ppp(IntensityFn::homogeneous(3.0), kSquare, std::uint64_t{21});
  CHECK(a == b);
}
