#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "heatsrc/geometry.hpp"
#include "heatsrc/ppp.hpp"

namespace heatsrc {

struct ForwardCheck {
  Point2 source;
  double discrepancy = 0.0;        // |spectral - oracle|_2 / |oracle|_2 on the finest grid
  double convergence_ratio = 0.0;  // |o(n) - o(2n)| / |o(2n) - o(4n)|
};

/// Single unit sources on random mesh nodes at least `clearance` from the
/// boundary, observed by twelve equally spaced sensors at t = 1. The oracle
/// runs on grids finest/4, finest/2 and finest.
std::vector<ForwardCheck> verify_forward(std::size_t cases, std::uint64_t seed,
                                         int finest_grid = 256, double clearance = 0.25);

struct PppDiagnostics {
  std::size_t replications = 0;
  PoissonFit homogeneous;
  PoissonFit thinned;
  PoissonFit superposed;
  double kept_removed_correlation = 0.0;  // thinned vs removed counts
  double void_empirical = 0.0;
  double void_expected = 0.0;
  double void_stderr = 0.0;

  /// Every goodness-of-fit p-value above alpha and the void probability
  /// within four standard errors.
  bool passed(double alpha = 0.01) const;
};

/// Monte Carlo on the unit-half-width square: homogeneous rate 2, thinning
/// with retention (x + 1) / 2, superposition of rates 2 and 1.5, and the
/// void probability of [0, 0.5)^2 under rate 2.
PppDiagnostics ppp_diagnostics(std::size_t replications, std::uint64_t seed);

}  // namespace heatsrc
