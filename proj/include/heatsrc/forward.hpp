#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>

#include "heatsrc/geometry.hpp"
#include "heatsrc/sources.hpp"

namespace heatsrc {

/// Boundary flux observations, ordered as ObservationPlan::index.
using FluxVector = Eigen::VectorXd;

inline constexpr int kDefaultModes = 60;

/// Outward normal derivative du/dn at every (sensor, time) of the plan for a
/// unit source at `source`, solving u_t - Lap u = delta_source with zero
/// initial and boundary data on the square.
///
/// The solution is split into its steady part and a decaying transient.
/// The transient is the truncated double sine series
///   -sum_{m,n<=modes} exp(-lambda_mn t) / lambda_mn phi_mn(src) dphi_mn/dn(sensor);
/// the steady part sums the tangential modes n <= modes and resolves the
/// normal direction with the exact 1-D Green's function, which converges
/// exponentially where the plain double series converges like 1/modes.
FluxVector unit_source_flux(Point2 source, const ObservationPlan& plan,
                            int modes = kDefaultModes);

/// Column j holds unit_source_flux(mesh.node(j)).
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(Eigen::MatrixXd entries, std::uint64_t key)
      : entries_(std::move(entries)), key_(key) {}

  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index obs_count() const { return entries_.rows(); }
  Eigen::Index node_count() const { return entries_.cols(); }
  auto column(Eigen::Index j) const { return entries_.col(j); }
  std::uint64_t key() const { return key_; }

  FluxVector apply(std::span<const double> node_weights) const;

 private:
  Eigen::MatrixXd entries_;
  std::uint64_t key_ = 0;
};

ObservationMatrix assemble_observation_matrix(const Mesh& mesh, const ObservationPlan& plan,
                                              int modes = kDefaultModes);

/// Hash of everything the matrix depends on; used as the cache key.
std::uint64_t observation_matrix_key(const Mesh& mesh, const ObservationPlan& plan, int modes);

/// Cache file layout (all little-endian):
///   char[8] magic "HSRCOBS1" | u64 key | u64 rows | u64 cols | f64 entries, row-major
void save_observation_matrix(const std::filesystem::path& path, const ObservationMatrix& m);
/// Returns an empty matrix if the file is missing or its key differs.
ObservationMatrix load_observation_matrix(const std::filesystem::path& path,
                                          std::uint64_t expected_key);
/// Loads `<dir>/obs_<key>.bin` or assembles and writes it.
ObservationMatrix cached_observation_matrix(const std::filesystem::path& dir, const Mesh& mesh,
                                            const ObservationPlan& plan,
                                            int modes = kDefaultModes);

/// K(f) for sources on mesh nodes, through the precomputed matrix.
/// Throws DomainError if a source is not on a mesh node.
FluxVector forward_flux(const PointSourceSet& f, const ObservationMatrix& A, const Mesh& mesh);

/// K(f) by direct series evaluation; any interior locations.
FluxVector forward_flux(const PointSourceSet& f, const ObservationPlan& plan,
                        int modes = kDefaultModes);

/// Finite-difference reference solution: Peaceman-Rachford ADI on a uniform
/// grid with grid_n cells per axis, sources deposited on the nearest grid
/// node as w / h^2, and the normal derivative taken by a one-sided
/// second-order difference, interpolated along the edge to the sensor.
/// Requires grid_n >= 64 and dt <= 1e-3. Throws NumericalError on NaN.
FluxVector fd_oracle_flux(const PointSourceSet& f, const ObservationPlan& plan, int grid_n,
                          double dt);

}  // namespace heatsrc
