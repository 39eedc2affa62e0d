#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "heatsrc/data.hpp"
#include "heatsrc/errors.hpp"
#include "heatsrc/inference.hpp"

using namespace heatsrc;

namespace {

const Domain kUnit{1.0};
const Mesh kMesh(kUnit, 0.125);

std::size_t node(Point2 p) { return *kMesh.index_of(p); }

LevelSetField below(double value = -1.0) { return {Eigen::VectorXd::Constant(225, value)}; }

}  // namespace

TEST_CASE("potential: exact fit, noise scaling and guards") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  const PointSourceSet f{{{{-0.875, 0.0}, 0.7}, {{0.75, 0.625}, 0.5}}};
  const FluxVector g = forward_flux(f, A, kMesh);
  CHECK(potential(f, A, kMesh, g, NoiseModel{0.01}).potential == 0.0);
  const FluxVector off = g + FluxVector::Constant(g.size(), 0.003);
  const double p1 = potential(f, A, kMesh, off, NoiseModel{0.01}).potential;
  const double p2 = potential(f, A, kMesh, off, NoiseModel{0.02}).potential;
  CHECK(p2 == doctest::Approx(p1 / 4.0).epsilon(1e-14));
  CHECK_THROWS_AS(potential(g, g, NoiseModel{0.0}), ConfigError);
  CHECK_THROWS_AS(potential(g, FluxVector::Zero(3), NoiseModel{1.0}), ConfigError);
}

TEST_CASE("potential agrees with an independent sum of squares") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    PointSourceSet f;
    while (f.size() < 3) {
      const Point2 p = kMesh.node(rng.next_u64() % 225);
      bool dup = false;
      for (const auto& q : f.points) dup = dup || q.location == p;
      if (!dup) f.points.push_back({p, 0.2 + rng.uniform()});
    }
    std::vector<double> g(10);
    for (double& v : g) v = rng.normal(0.0, 0.1);
    const double sigma = 0.02 + rng.uniform() * 0.1;
    // Reference: forward values by direct series evaluation per source,
    // accumulated entry by entry.
    double ss = 0.0;
    for (int i = 0; i < 10; ++i) {
      double kf = 0.0;
      for (const auto& p : f.points) kf += p.intensity * unit_source_flux(p.location, plan)[i];
      ss += (kf - g[i]) * (kf - g[i]);
    }
    const double want = ss / (2.0 * sigma * sigma);
    const FluxVector gv = Eigen::Map<const Eigen::VectorXd>(g.data(), 10);
    const double got = potential(f, A, kMesh, gv, NoiseModel{sigma}).potential;
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("acceptance probability depends on the potential difference only") {
  CHECK(pcn_acceptance_probability(5.0, 5.0) == 1.0);
  CHECK(pcn_acceptance_probability(5.0, 2.0) == 1.0);
  CHECK(pcn_acceptance_probability(2.0, 5.0) == doctest::Approx(std::exp(-3.0)));
  CHECK(pcn_acceptance_probability(1002.0, 1005.0) ==
        doctest::Approx(pcn_acceptance_probability(2.0, 5.0)));
}

TEST_CASE("flat potential: every pCN proposal is accepted") {
  const ObservationMatrix zero(Eigen::MatrixXd::Zero(4, 225), 0);
  const InferenceProblem problem{kMesh, zero, FluxVector::Zero(4), NoiseModel{1.0}, ThresholdSpec{}};
  PriorSampler prior = build_prior(kMesh, CovarianceSpec{}, 3);
  Rng accept = Rng::stream(3, StreamPurpose::kAccept);
  ThinningState s = make_state(problem, prior.sample());
  for (int k = 0; k < 500; ++k) REQUIRE(pcn_step(s, 0.2, prior, accept, problem));
  CHECK(s.potential == 0.0);
  CHECK(is_consistent(s, problem));
}

TEST_CASE("pCN accept/reject sequence is reproducible") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  const FluxData d = generate_data(PointSourceSet{{{{-0.875, 0.0}, 0.7}}}, plan, 0.01, 4);
  const InferenceProblem problem{kMesh, A, d.g, NoiseModel{d.sigma_noise}, ThresholdSpec{0.05}};
  auto run = [&] {
    PriorSampler prior = build_prior(kMesh, CovarianceSpec{0.25, 0.1, 1e-8}, 8);
    Rng accept = Rng::stream(8, StreamPurpose::kAccept);
    ThinningState s = make_state(problem, prior.sample());
    std::vector<bool> seq;
    for (int k = 0; k < 300; ++k) seq.push_back(pcn_step(s, 0.01, prior, accept, problem));
    return std::make_pair(seq, s.phi.values);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(std::count(a.first.begin(), a.first.end(), true) > 0);
  CHECK(std::count(a.first.begin(), a.first.end(), false) > 0);
}

TEST_CASE("thinning on an empty set is a no-op") {
  const ObservationMatrix zero(Eigen::MatrixXd::Zero(4, 225), 0);
  const InferenceProblem problem{kMesh, zero, FluxVector::Zero(4), NoiseModel{1.0}, ThresholdSpec{}};
  ThinningState s = make_state(problem, below());
  Rng rng(1);
  CHECK(thinning_pass(s, problem, rng) == 0);
  CHECK(s.theta.empty());
  CHECK(s.phi.values == below().values);
}

TEST_CASE("a point that does not change the misfit is always removed") {
  // Column of node j is zero, so dropping j leaves the potential unchanged.
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix full = assemble_observation_matrix(kMesh, plan);
  Eigen::MatrixXd m = full.entries();
  const std::size_t j = node({0.25, 0.5});
  const std::size_t t = node({-0.875, 0.0});
  m.col(static_cast<Eigen::Index>(j)).setZero();
  const ObservationMatrix A(m, 0);
  const FluxVector g = 0.7 * m.col(static_cast<Eigen::Index>(t));
  const InferenceProblem problem{kMesh, A, g, NoiseModel{1e-3}, ThresholdSpec{0.05}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    LevelSetField phi = below(0.0);
    phi[static_cast<Eigen::Index>(t)] = 0.7;
    phi[static_cast<Eigen::Index>(j)] = 0.4;
    ThinningState s = make_state(problem, phi);
    REQUIRE(s.potential < 1e-20);
    Rng rng = Rng::stream(seed, StreamPurpose::kThinning);
    thinning_pass(s, problem, rng);
    REQUIRE(s.theta.size() == 1);
    CHECK(s.theta.points[0].location == Point2{-0.875, 0.0});
    CHECK(s.phi[static_cast<Eigen::Index>(j)] == doctest::Approx(0.04));
  }
}

TEST_CASE("planted spurious point is thinned and the true point kept") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  const PointSourceSet truth{{{{-0.875, 0.0}, 0.7}}};
  const std::size_t t = node({-0.875, 0.0});
  const std::size_t j = node({0.25, 0.5});
  int spurious_removed = 0, true_kept = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FluxData d = generate_data(truth, plan, 0.01, seed);
    const InferenceProblem problem{kMesh, A, d.g, NoiseModel{d.sigma_noise}, ThresholdSpec{0.05}};
    LevelSetField phi = below(0.0);
    phi[static_cast<Eigen::Index>(t)] = 0.7;
    phi[static_cast<Eigen::Index>(j)] = 0.15;
    ThinningState s = make_state(problem, phi);
    Rng rng = Rng::stream(seed, StreamPurpose::kThinning);
    const std::size_t before = s.theta.size();
    thinning_pass(s, problem, rng);
    CHECK(s.theta.size() <= before);
    CHECK(is_consistent(s, problem));
    bool has_true = false, has_spurious = false;
    for (const auto& p : s.theta.points) {
      has_true = has_true || p.location == kMesh.node(t);
      has_spurious = has_spurious || p.location == kMesh.node(j);
    }
    spurious_removed += !has_spurious;
    true_kept += has_true;
  }
  CHECK(spurious_removed > 90);
  CHECK(true_kept > 90);
}

TEST_CASE("thinning never adds points and keeps the state consistent") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  const FluxData d = generate_data(PointSourceSet{{{{0.75, 0.625}, 0.5}}}, plan, 0.01, 2);
  const InferenceProblem problem{kMesh, A, d.g, NoiseModel{d.sigma_noise}, ThresholdSpec{0.3}};
  PriorSampler prior = build_prior(kMesh, CovarianceSpec{}, 12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ThinningState s = make_state(problem, prior.sample());
    const auto before = s.active;
    Rng rng = Rng::stream(seed, StreamPurpose::kThinning);
    const std::size_t removed = thinning_pass(s, problem, rng, 1.0);
    CHECK(s.active.size() + removed == before.size());
    CHECK(std::includes(before.begin(), before.end(), s.active.begin(), s.active.end()));
    CHECK(is_consistent(s, problem));
  }
  ThinningState s = make_state(problem, prior.sample());
  Rng rng(0);
  CHECK_THROWS_AS(thinning_pass(s, problem, rng, 0.0), ConfigError);
  CHECK_THROWS_AS(thinning_pass(s, problem, rng, 1.0, 0.5), ConfigError);
}

TEST_CASE("zero iterations return the thresholded prior draw") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  const FluxData d = generate_data(PointSourceSet{{{{-0.875, 0.0}, 0.7}}}, plan, 0.01, 1);
  const InferenceProblem problem{kMesh, A, d.g, NoiseModel{d.sigma_noise}, ThresholdSpec{0.3}};
  SamplerConfig cfg;
  cfg.max_iterations = 0;
  const ThinningState s = bayesian_thinning_run(problem, CovarianceSpec{}, cfg, 17);
  PriorSampler prior = build_prior(kMesh, CovarianceSpec{}, 17);
  const LevelSetField phi0 = prior.sample();
  CHECK(s.phi.values == phi0.values);
  CHECK(s.theta.points == threshold_map(phi0, kMesh, ThresholdSpec{0.3}).points);
  REQUIRE(s.trace.size() == 1);
  CHECK(s.trace[0].iteration == 0);
  CHECK(std::isnan(s.trace[0].relative_error));
}

TEST_CASE("full runs replay bit for bit") {
  const auto plan = make_observation_plan(kUnit, 10, FixedTime{1.0});
  const ObservationMatrix A = assemble_observation_matrix(kMesh, plan);
  const PointSourceSet truth{{{{-0.875, 0.0}, 0.7}}};
  const FluxData d = generate_data(truth, plan, 0.01, 3);
  const InferenceProblem problem{kMesh, A, d.g, NoiseModel{d.sigma_noise}, ThresholdSpec{0.05}};
  SamplerConfig cfg;
  cfg.beta = 0.02;
  cfg.pcn_steps = 10;
  cfg.max_iterations = 100;
  cfg.initial_temperature = 50.0;
  cfg.anneal_fraction = 0.5;
  cfg.beta_temperature_exponent = 0.5;
  const CovarianceSpec ps{0.25, 0.1, 1e-8};
  const ThinningState a = bayesian_thinning_run(problem, ps, cfg, 9, truth);
  const ThinningState b = bayesian_thinning_run(problem, ps, cfg, 9, truth);
  const ThinningState c = bayesian_thinning_run(problem, ps, cfg, 10, truth);
  REQUIRE(a.trace.size() == 101);
  CHECK(a.phi.values == b.phi.values);
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].iteration == static_cast<int>(k));
    CHECK(a.trace[k].potential == b.trace[k].potential);
    CHECK(a.trace[k].relative_error == b.trace[k].relative_error);
    CHECK(a.trace[k].source_count == b.trace[k].source_count);
  }
  CHECK(a.phi.values != c.phi.values);
  CHECK(is_consistent(a, problem));
}

TEST_CASE("sampler configuration and annealing schedule") {
  SamplerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.temperature(0) == 1.0);
  cfg.beta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SamplerConfig{};
  cfg.initial_temperature = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SamplerConfig{};
  cfg.anneal_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SamplerConfig{};
  cfg.beta_temperature_exponent = -0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = SamplerConfig{};
  cfg.max_iterations = 100;
  cfg.initial_temperature = 100.0;
  cfg.anneal_fraction = 0.5;
  CHECK(cfg.temperature(0) == doctest::Approx(100.0));
  CHECK(cfg.temperature(25) == doctest::Approx(10.0));
  CHECK(cfg.temperature(50) == 1.0);
  CHECK(cfg.temperature(99) == 1.0);
  for (int n = 1; n < 100; ++n) CHECK(cfg.temperature(n) <= cfg.temperature(n - 1));
}

TEST_CASE("relative error on node weights") {
  const PointSourceSet truth{{{{-0.875, 0.0}, 1.0}}};
  CHECK(relative_error(truth, truth, kMesh) == 0.0);
  CHECK(relative_error(PointSourceSet{}, truth, kMesh) == 1.0);
  CHECK(relative_error(PointSourceSet{{{{-0.875, 0.0}, 0.5}}}, truth, kMesh) ==
        doctest::Approx(0.5));
  // A wrong node: error sqrt(1 + 1) / 1.
  CHECK(relative_error(PointSourceSet{{{{0.0, 0.0}, 1.0}}}, truth, kMesh) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(relative_error(truth, PointSourceSet{}, kMesh), ConfigError);
}
