#include "heatsrc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "heatsrc/errors.hpp"

namespace heatsrc {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  return root.contains(key) ? root.at(key) : empty;
}

}  // namespace

void ExperimentConfig::validate() const {
  domain.validate();
  const Mesh mesh(domain, mesh_spacing);
  make_observation_plan(domain, sensor_count, times);
  if (modes < 1) throw ConfigError("forward modes must be >= 1");
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
    throw ConfigError("noise level must be >= 0");
  }
  if (truth.empty()) throw ConfigError("truth must contain at least one source");
  truth.validate();
  for (const auto& p : truth.points) {
    if (!mesh.index_of(p.location)) {
      throw ConfigError("truth source (" + format_number(p.location.x) + ", " +
                        format_number(p.location.y) + ") is not an interior mesh node");
    }
  }
  prior.validate();
  threshold.validate();
  sampler.validate();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"name", "domain", "mesh", "observation", "forward", "truth", "noise", "prior",
                  "threshold", "sampler", "seed", "output_dir", "cache_dir"},
                 "config");
  ExperimentConfig c;
  read_opt(root, "name", c.name, "config");
  read_opt(root, "seed", c.seed, "config");
  std::string out = c.output_dir.string();
  read_opt(root, "output_dir", out, "config");
  c.output_dir = out;
  std::string cache;
  read_opt(root, "cache_dir", cache, "config");
  c.cache_dir = cache;

  const json& dom = section(root, "domain");
  reject_unknown(dom, {"half_width"}, "domain");
  read_opt(dom, "half_width", c.domain.half_width, "domain");

  const json& mesh = section(root, "mesh");
  reject_unknown(mesh, {"spacing"}, "mesh");
  read_opt(mesh, "spacing", c.mesh_spacing, "mesh");

  const json& obs = section(root, "observation");
  reject_unknown(obs, {"sensors", "time"}, "observation");
  read_opt(obs, "sensors", c.sensor_count, "observation");
  if (obs.contains("time")) {
    const json& t = obs.at("time");
    reject_unknown(t, {"fixed", "dt", "horizon"}, "observation.time");
    if (t.contains("fixed")) {
      if (t.contains("dt") || t.contains("horizon")) {
        throw ConfigError("observation.time: give either 'fixed' or 'dt'/'horizon'");
      }
      FixedTime ft;
      read_opt(t, "fixed", ft.t, "observation.time");
      c.times = ft;
    } else {
      UniformTimes ut;
      read_opt(t, "dt", ut.dt, "observation.time");
      read_opt(t, "horizon", ut.horizon, "observation.time");
      c.times = ut;
    }
  }

  const json& fwd = section(root, "forward");
  reject_unknown(fwd, {"modes"}, "forward");
  read_opt(fwd, "modes", c.modes, "forward");

  if (root.contains("truth")) {
    const json& t = root.at("truth");
    if (!t.is_array()) throw ConfigError("truth must be an array");
    for (const json& p : t) {
      reject_unknown(p, {"x", "y", "intensity"}, "truth entry");
      if (!p.contains("x") || !p.contains("y")) throw ConfigError("truth entry needs x and y");
      PointSource s{{0.0, 0.0}, 1.0};
      read_opt(p, "x", s.location.x, "truth");
      read_opt(p, "y", s.location.y, "truth");
      read_opt(p, "intensity", s.intensity, "truth");
      c.truth.points.push_back(s);
    }
  }

  const json& noise = section(root, "noise");
  reject_unknown(noise, {"level", "norm"}, "noise");
  read_opt(noise, "level", c.noise_level, "noise");
  if (noise.contains("norm")) {
    std::string n;
    read_opt(noise, "norm", n, "noise");
    if (n == "rms") c.noise_norm = NoiseNorm::kRms;
    else if (n == "euclidean") c.noise_norm = NoiseNorm::kEuclidean;
    else throw ConfigError("noise.norm must be 'rms' or 'euclidean'");
  }

  const json& pr = section(root, "prior");
  reject_unknown(pr, {"variance", "length_scale", "nugget"}, "prior");
  read_opt(pr, "variance", c.prior.variance, "prior");
  read_opt(pr, "length_scale", c.prior.length_scale, "prior");
  read_opt(pr, "nugget", c.prior.nugget, "prior");

  const json& th = section(root, "threshold");
  reject_unknown(th, {"c", "intensity", "suppress_margin"}, "threshold");
  read_opt(th, "c", c.threshold.c, "threshold");
  read_opt(th, "suppress_margin", c.threshold.suppress_margin, "threshold");
  if (th.contains("intensity")) {
    std::string v;
    read_opt(th, "intensity", v, "threshold");
    if (v == "weighted") c.threshold.variant = IntensityVariant::kWeighted;
    else if (v == "constant") c.threshold.variant = IntensityVariant::kConstant;
    else throw ConfigError("threshold.intensity must be 'weighted' or 'constant'");
  }

  const json& s = section(root, "sampler");
  reject_unknown(s,
                 {"beta", "pcn_steps", "max_iterations", "thinning", "prior_factor",
                  "initial_temperature", "anneal_fraction", "beta_temperature_exponent"},
                 "sampler");
  read_opt(s, "beta", c.sampler.beta, "sampler");
  read_opt(s, "pcn_steps", c.sampler.pcn_steps, "sampler");
  read_opt(s, "max_iterations", c.sampler.max_iterations, "sampler");
  read_opt(s, "thinning", c.sampler.thinning, "sampler");
  read_opt(s, "prior_factor", c.sampler.prior_factor, "sampler");
  read_opt(s, "initial_temperature", c.sampler.initial_temperature, "sampler");
  read_opt(s, "anneal_fraction", c.sampler.anneal_fraction, "sampler");
  read_opt(s, "beta_temperature_exponent", c.sampler.beta_temperature_exponent, "sampler");

  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

bool MatchReport::covers_truth() const {
  return missed.empty() &&
         std::all_of(pairs.begin(), pairs.end(),
                     [](const MatchedPair& p) { return p.position_error_cells == 0.0; });
}

bool MatchReport::exact_positions() const { return covers_truth() && spurious.empty(); }

bool MatchReport::exact(double intensity_tol) const {
  return exact_positions() &&
         std::all_of(pairs.begin(), pairs.end(), [&](const MatchedPair& p) {
           return std::abs(p.intensity_error) <= intensity_tol;
         });
}

MatchReport match_sources(const PointSourceSet& estimate, const PointSourceSet& truth,
                          double cell_size, double max_cells) {
  if (!(cell_size > 0.0)) throw ConfigError("cell size must be positive");
  std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < estimate.size(); ++j) {
      const double d = distance(truth.points[i].location, estimate.points[j].location) / cell_size;
      if (d <= max_cells + 1e-9) cand.emplace_back(d, i, j);
    }
  }
  std::sort(cand.begin(), cand.end());
  std::vector<bool> t_used(truth.size(), false), e_used(estimate.size(), false);
  MatchReport r;
  for (const auto& [d, i, j] : cand) {
    if (t_used[i] || e_used[j]) continue;
    t_used[i] = e_used[j] = true;
    // Snap sub-1e-9 distances (floating node coordinates) to exact zero.
    r.pairs.push_back({i, j, d < 1e-9 ? 0.0 : d,
                       estimate.points[j].intensity - truth.points[i].intensity});
  }
  std::sort(r.pairs.begin(), r.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.truth_index < b.truth_index; });
  for (std::size_t i = 0; i < truth.size(); ++i) if (!t_used[i]) r.missed.push_back(i);
  for (std::size_t j = 0; j < estimate.size(); ++j) if (!e_used[j]) r.spurious.push_back(j);
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Mesh mesh(config.domain, config.mesh_spacing);
  const ObservationPlan plan =
      make_observation_plan(config.domain, config.sensor_count, config.times);
  const ObservationMatrix A =
      config.cache_dir.empty() ? assemble_observation_matrix(mesh, plan, config.modes)
                               : cached_observation_matrix(config.cache_dir, mesh, plan, config.modes);

  ExperimentReport r;
  r.config = config;
  r.data = generate_data(config.truth, plan, config.noise_level, config.seed, config.noise_norm,
                         config.modes);
  // Noise-free data give sigma = 0; fall back to a unit-scale likelihood.
  const double sigma = r.data.sigma_noise > 0.0 ? r.data.sigma_noise : 1e-12;
  const InferenceProblem problem{mesh, A, r.data.g, NoiseModel{sigma}, config.threshold};
  r.final_state =
      bayesian_thinning_run(problem, config.prior, config.sampler, config.seed, config.truth);
  r.match = match_sources(r.final_state.theta, config.truth, config.mesh_spacing);
  const double gnorm = r.data.g.norm();
  r.final_misfit = gnorm > 0.0 ? r.final_state.residual.norm() / gnorm : 0.0;
  r.final_relative_error = relative_error(r.final_state.theta, config.truth, mesh);
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string point_str(Point2 p) { return "(" + fixed(p.x, 3) + ", " + fixed(p.y, 3) + ")"; }

void write_points_csv(const std::filesystem::path& path, const PointSourceSet& s) {
  std::ofstream os(path);
  os << "x,y,intensity\n";
  for (const auto& p : s.points) {
    os << format_number(p.location.x) << ',' << format_number(p.location.y) << ','
       << format_number(p.intensity) << '\n';
  }
}

json points_json(const PointSourceSet& s) {
  json arr = json::array();
  for (const auto& p : s.points) {
    arr.push_back({{"x", p.location.x}, {"y", p.location.y}, {"intensity", p.intensity}});
  }
  return arr;
}

}  // namespace

std::string format_summary_table(const ExperimentReport& report) {
  const auto& truth = report.config.truth;
  const auto& est = report.final_state.theta;
  std::ostringstream os;
  os << "experiment: " << report.config.name << "  seed: " << report.config.seed << '\n';
  os << "exact position        exact w   | reconstructed position  reconstructed w  |dx| cells\n";
  os << "------------------------------------------------------------------------------------\n";
  for (const auto& p : report.match.pairs) {
    const auto& t = truth.points[p.truth_index];
    const auto& e = est.points[p.estimate_index];
    char line[160];
    std::snprintf(line, sizeof line, "%-21s %-9s | %-23s %-16s %s\n", point_str(t.location).c_str(),
                  fixed(t.intensity, 4).c_str(), point_str(e.location).c_str(),
                  fixed(e.intensity, 4).c_str(), fixed(p.position_error_cells, 2).c_str());
    os << line;
  }
  for (std::size_t i : report.match.missed) {
    char line[160];
    std::snprintf(line, sizeof line, "%-21s %-9s | %-23s %-16s %s\n",
                  point_str(truth.points[i].location).c_str(),
                  fixed(truth.points[i].intensity, 4).c_str(), "missed", "-", "-");
    os << line;
  }
  for (std::size_t j : report.match.spurious) {
    char line[160];
    std::snprintf(line, sizeof line, "%-21s %-9s | %-23s %-16s %s\n", "spurious", "-",
                  point_str(est.points[j].location).c_str(), fixed(est.points[j].intensity, 4).c_str(),
                  "-");
    os << line;
  }
  os << "sources: " << est.size() << "  relative error: " << fixed(report.final_relative_error, 4)
     << "  data misfit: " << fixed(report.final_misfit, 5)
     << "  potential: " << fixed(report.final_state.potential, 3) << '\n';
  return os.str();
}

void write_outputs(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Mesh mesh(report.config.domain, report.config.mesh_spacing);
  {
    std::ofstream os(dir / "trace.csv");
    os << "iteration,relative_error,source_count,potential,acceptance_rate\n";
    for (const auto& t : report.final_state.trace) {
      os << t.iteration << ',' << format_number(t.relative_error) << ',' << t.source_count << ','
         << format_number(t.potential) << ',' << format_number(t.acceptance_rate) << '\n';
    }
  }
  write_points_csv(dir / "estimate.csv", report.final_state.theta);
  write_points_csv(dir / "truth.csv", report.config.truth);
  {
    std::ofstream os(dir / "scatter.csv");
    os << "role,x,y,intensity\n";
    for (const auto& p : report.config.truth.points) {
      os << "truth," << format_number(p.location.x) << ',' << format_number(p.location.y) << ','
         << format_number(p.intensity) << '\n';
    }
    for (const auto& p : report.final_state.theta.points) {
      os << "estimate," << format_number(p.location.x) << ',' << format_number(p.location.y)
         << ',' << format_number(p.intensity) << '\n';
    }
  }
  {
    std::ofstream os(dir / "field.csv");
    write_field_csv(os, mesh, report.final_state.phi);
  }
  {
    std::ofstream os(dir / "sources.json");
    os << points_json(report.final_state.theta).dump(2) << '\n';
  }
  {
    json pairs = json::array();
    for (const auto& p : report.match.pairs) {
      pairs.push_back({{"truth_index", p.truth_index},
                       {"estimate_index", p.estimate_index},
                       {"position_error_cells", p.position_error_cells},
                       {"intensity_error", p.intensity_error}});
    }
    json j = {{"name", report.config.name},
              {"seed", report.config.seed},
              {"thinning", report.config.sampler.thinning},
              {"sigma_noise", report.data.sigma_noise},
              {"truth", points_json(report.config.truth)},
              {"estimate", points_json(report.final_state.theta)},
              {"matched", pairs},
              {"spurious", report.match.spurious},
              {"missed", report.match.missed},
              {"exact_positions", report.match.exact_positions()},
              {"final_potential", report.final_state.potential},
              {"final_misfit", report.final_misfit},
              {"final_relative_error", report.final_relative_error}};
    std::ofstream os(dir / "summary.json");
    os << j.dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "summary.txt");
    os << format_summary_table(report);
  }
}

}  // namespace heatsrc
