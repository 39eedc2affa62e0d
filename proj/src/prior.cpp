#include "heatsrc/prior.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "heatsrc/errors.hpp"

namespace heatsrc {

void CovarianceSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ConfigError("prior variance must be positive");
  }
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw ConfigError("prior length scale must be positive");
  }
  if (!(nugget >= 0.0)) throw ConfigError("prior nugget must be non-negative");
}

double CovarianceSpec::kernel(Point2 a, Point2 b) const {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return variance * std::exp(-(dx * dx + dy * dy) / (2.0 * length_scale * length_scale));
}

PriorSampler::PriorSampler(const Mesh& mesh, const CovarianceSpec& spec, Rng stream)
    : spec_(spec), rng_(stream) {
  spec_.validate();
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  covariance_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = spec_.kernel(mesh.node(static_cast<std::size_t>(i)),
                                    mesh.node(static_cast<std::size_t>(j)));
      covariance_(i, j) = k;
      covariance_(j, i) = k;
    }
  }
  Eigen::MatrixXd regularized = covariance_;
  regularized.diagonal().array() += spec_.nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(regularized, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    std::ostringstream msg;
    msg << "prior covariance is not positive definite (eigenvalues in [" << ev.minCoeff()
        << ", " << ev.maxCoeff() << "], condition estimate "
        << ev.maxCoeff() / std::abs(ev.minCoeff()) << "); increase the nugget";
    throw NumericalError(msg.str());
  }
  factor_ = llt.matrixL();
  scratch_.resize(n);
}

LevelSetField PriorSampler::sample() {
  for (Eigen::Index i = 0; i < scratch_.size(); ++i) scratch_[i] = rng_.normal();
  LevelSetField out;
  out.values = factor_.triangularView<Eigen::Lower>() * scratch_;
  return out;
}

double PriorSampler::factorization_residual() const {
  Eigen::MatrixXd diff = factor_ * factor_.transpose() - covariance_;
  diff.diagonal().array() -= spec_.nugget;
  return diff.norm() / covariance_.norm();
}

PriorSampler build_prior(const Mesh& mesh, const CovarianceSpec& spec, std::uint64_t seed) {
  return PriorSampler(mesh, spec, Rng::stream(seed, StreamPurpose::kPrior));
}

void validate_pcn_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("pCN beta must lie in (0, 1]");
}

LevelSetField pcn_propose(const LevelSetField& current, double beta, PriorSampler& sampler) {
  validate_pcn_beta(beta);
  if (current.size() != sampler.dimension()) {
    throw ConfigError("level-set field does not match the prior dimension");
  }
  LevelSetField xi = sampler.sample();
  xi.values = std::sqrt(1.0 - beta * beta) * current.values + beta * xi.values;
  return xi;
}

void write_field_csv(std::ostream& os, const Mesh& mesh, const LevelSetField& field) {
  os << "node,x,y,phi\n";
  os.precision(17);
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const auto p = mesh.node(i);
    os << i << ',' << p.x << ',' << p.y << ',' << field[static_cast<Eigen::Index>(i)] << '\n';
  }
}

}  // namespace heatsrc
