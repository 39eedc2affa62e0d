#include "heatsrc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "heatsrc/errors.hpp"
#include "heatsrc/forward.hpp"
#include "heatsrc/rng.hpp"
#include "heatsrc/sources.hpp"

namespace heatsrc {

std::vector<ForwardCheck> verify_forward(std::size_t cases, std::uint64_t seed, int finest_grid,
                                         double clearance) {
  if (finest_grid % 4 != 0 || finest_grid / 4 < 64) {
    throw ConfigError("finest grid must be a multiple of 4 and at least 256");
  }
  const Domain domain{1.0};
  const Mesh mesh(domain, 0.125);
  const ObservationPlan plan = make_observation_plan(domain, 12, FixedTime{1.0});
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (domain.boundary_distance(mesh.node(i)) >= clearance - 1e-12) eligible.push_back(i);
  }
  Rng rng = Rng::stream(seed, 0x66776476ULL);
  std::vector<ForwardCheck> out;
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t pick = eligible[rng.next_u64() % eligible.size()];
    const Point2 src = mesh.node(pick);
    const PointSourceSet f{{{src, 1.0}}};
    const FluxVector spectral = forward_flux(f, plan);
    const FluxVector coarse = fd_oracle_flux(f, plan, finest_grid / 4, 1e-3);
    const FluxVector mid = fd_oracle_flux(f, plan, finest_grid / 2, 1e-3);
    const FluxVector fine = fd_oracle_flux(f, plan, finest_grid, 1e-3);
    ForwardCheck c;
    c.source = src;
    c.discrepancy = (spectral - fine).norm() / fine.norm();
    c.convergence_ratio = (coarse - mid).norm() / (mid - fine).norm();
    out.push_back(c);
  }
  return out;
}

bool PppDiagnostics::passed(double alpha) const {
  return homogeneous.p_value > alpha && thinned.p_value > alpha && superposed.p_value > alpha &&
         std::abs(void_empirical - void_expected) <= 4.0 * void_stderr;
}

PppDiagnostics ppp_diagnostics(std::size_t replications, std::uint64_t seed) {
  if (replications < 100) throw ConfigError("need at least 100 replications");
  const Domain domain{1.0};
  const double area = domain.area();
  const IntensityFn base = IntensityFn::homogeneous(2.0);
  const IntensityFn extra = IntensityFn::homogeneous(1.5);
  const auto retain = [](Point2 p) { return (p.x + 1.0) / 2.0; };
  const Rect window{0.0, 0.5, 0.0, 0.5};

  Rng rng = Rng::stream(seed, StreamPurpose::kPointProcess);
  std::vector<std::size_t> n_base, n_kept, n_super;
  std::vector<double> kept_d, removed_d;
  std::size_t voids = 0;
  for (std::size_t r = 0; r < replications; ++r) {
    const auto pts = sample_ppp(base, domain, rng);
    const auto kept = thin_ppp(pts, retain, rng);
    const auto other = sample_ppp(extra, domain, rng);
    const auto sup = superpose(pts, other);
    n_base.push_back(pts.size());
    n_kept.push_back(kept.size());
    n_super.push_back(sup.size());
    kept_d.push_back(static_cast<double>(kept.size()));
    removed_d.push_back(static_cast<double>(pts.size() - kept.size()));
    if (count_in(pts, window) == 0) ++voids;
  }
  PppDiagnostics d;
  d.replications = replications;
  d.homogeneous = poisson_goodness_of_fit(n_base, 2.0 * area);
  // Mean retention of (x + 1) / 2 over the square is 1/2.
  d.thinned = poisson_goodness_of_fit(n_kept, 2.0 * area * 0.5);
  d.superposed = poisson_goodness_of_fit(n_super, 3.5 * area);
  d.kept_removed_correlation = correlation(kept_d, removed_d);
  d.void_expected = std::exp(-2.0 * window.area());
  d.void_empirical = static_cast<double>(voids) / static_cast<double>(replications);
  d.void_stderr =
      std::sqrt(d.void_expected * (1.0 - d.void_expected) / static_cast<double>(replications));
  return d;
}

}  // namespace heatsrc
