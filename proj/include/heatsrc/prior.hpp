#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>

#include "heatsrc/geometry.hpp"
#include "heatsrc/rng.hpp"

namespace heatsrc {

/// Squared-exponential covariance k(x, y) = variance * exp(-|x - y|^2 / (2 length_scale^2)).
struct CovarianceSpec {
  double variance = 1.0;
  double length_scale = 0.2;
  double nugget = 1e-8;

  void validate() const;
  double kernel(Point2 a, Point2 b) const;
};

/// Latent level-set values, one per mesh node.
struct LevelSetField {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }
};

/// Gaussian prior N(0, C) on mesh nodal values, sampled through a dense
/// Cholesky factor L L^T = C + nugget I.
class PriorSampler {
 public:
  PriorSampler(const Mesh& mesh, const CovarianceSpec& spec, Rng stream);

  /// phi = L z with z i.i.d. standard normal.
  LevelSetField sample();

  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& factor() const { return factor_; }
  const CovarianceSpec& spec() const { return spec_; }
  Eigen::Index dimension() const { return factor_.rows(); }
  /// ||L L^T - (C + nugget I)||_F / ||C||_F
  double factorization_residual() const;

 private:
  CovarianceSpec spec_;
  Eigen::MatrixXd covariance_;  // without the nugget
  Eigen::MatrixXd factor_;
  Rng rng_;
  Eigen::VectorXd scratch_;
};

/// Throws NumericalError with a condition estimate if C + nugget I is not
/// numerically positive definite.
PriorSampler build_prior(const Mesh& mesh, const CovarianceSpec& spec, std::uint64_t seed);

/// sqrt(1 - beta^2) current + beta xi, xi drawn from the prior.
LevelSetField pcn_propose(const LevelSetField& current, double beta, PriorSampler& sampler);

void validate_pcn_beta(double beta);

/// CSV rows: node,x,y,phi
void write_field_csv(std::ostream& os, const Mesh& mesh, const LevelSetField& field);

}  // namespace heatsrc
