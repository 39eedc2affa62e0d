#include "heatsrc/forward.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "heatsrc/errors.hpp"
#include "heatsrc/rng.hpp"

namespace heatsrc {
namespace {

constexpr int kMaxModes = 4096;

/// Sensor-aligned coordinates: the sensor sits at normal = +a.
struct EdgeFrame {
  double source_normal;
  double source_tangent;
  double sensor_tangent;
};

EdgeFrame edge_frame(const Sensor& s, Point2 src) {
  switch (s.edge) {
    case Edge::kEast:
      return {src.x, src.y, s.location.y};
    case Edge::kWest:
      return {-src.x, src.y, s.location.y};
    case Edge::kNorth:
      return {src.y, src.x, s.location.x};
    case Edge::kSouth:
      return {-src.y, src.x, s.location.x};
  }
  return {};
}

/// Precomputed mode tables for one (plan, modes) pair.
class SeriesEvaluator {
 public:
  SeriesEvaluator(const ObservationPlan& plan, int modes) : plan_(plan), modes_(modes) {
    if (modes < 1 || modes > kMaxModes) {
      throw ConfigError("series modes must be in [1, " + std::to_string(kMaxModes) + "]");
    }
    plan_.validate();
    const double a = plan_.domain.half_width;
    const auto m = static_cast<std::size_t>(modes);
    wave_.resize(m);
    for (std::size_t n = 0; n < m; ++n) {
      wave_[n] = static_cast<double>(n + 1) * std::numbers::pi / (2.0 * a);
    }
    decay_.resize(plan_.times.size() * m * m);
    for (std::size_t t = 0; t < plan_.times.size(); ++t) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const double lambda = wave_[i] * wave_[i] + wave_[j] * wave_[j];
          decay_[(t * m + i) * m + j] = std::exp(-lambda * plan_.times[t]) / lambda;
        }
      }
    }
  }

  FluxVector evaluate(Point2 src) const {
    const Domain& domain = plan_.domain;
    if (!domain.contains(src)) {
      throw DomainError("point source must lie strictly inside the domain");
    }
    const double a = domain.half_width;
    const auto m = static_cast<std::size_t>(modes_);
    const std::size_t nt = plan_.times.size();
    FluxVector out(static_cast<Eigen::Index>(plan_.obs_count()));
    std::vector<double> normal_coef(m), tangent_coef(m);
    for (std::size_t s = 0; s < plan_.sensors.size(); ++s) {
      const EdgeFrame fr = edge_frame(plan_.sensors[s], src);
      double steady = 0.0;
      for (std::size_t n = 0; n < m; ++n) {
        const double k = wave_[n];
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;  // cos((n+1) pi)
        normal_coef[n] = std::sin(k * (fr.source_normal + a)) * k * sign / a;
        tangent_coef[n] =
            std::sin(k * (fr.source_tangent + a)) * std::sin(k * (fr.sensor_tangent + a)) / a;
        // sinh(k (q_s + a)) / sinh(2 k a), written to avoid overflow.
        const double ratio = std::exp(-k * (a - fr.source_normal)) *
                             -std::expm1(-2.0 * k * (fr.source_normal + a)) /
                             -std::expm1(-4.0 * k * a);
        steady -= tangent_coef[n] * ratio;
      }
      for (std::size_t t = 0; t < nt; ++t) {
        const double* table = &decay_[t * m * m];
        double transient = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          double inner = 0.0;
          const double* row = table + i * m;
          for (std::size_t j = 0; j < m; ++j) inner += row[j] * tangent_coef[j];
          transient += normal_coef[i] * inner;
        }
        out[static_cast<Eigen::Index>(plan_.index(s, t))] = steady - transient;
      }
    }
    return out;
  }

 private:
  ObservationPlan plan_;
  int modes_;
  std::vector<double> wave_;
  std::vector<double> decay_;
};

std::uint64_t hash_double(std::uint64_t h, double v) {
  return mix64(h ^ std::bit_cast<std::uint64_t>(v));
}

void write_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

bool read_u64(std::istream& is, std::uint64_t& v) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

constexpr char kCacheMagic[8] = {'H', 'S', 'R', 'C', 'O', 'B', 'S', '1'};

}  // namespace

FluxVector unit_source_flux(Point2 source, const ObservationPlan& plan, int modes) {
  return SeriesEvaluator(plan, modes).evaluate(source);
}

FluxVector ObservationMatrix::apply(std::span<const double> node_weights) const {
  if (static_cast<Eigen::Index>(node_weights.size()) != entries_.cols()) {
    throw ConfigError("weight vector length does not match the observation matrix");
  }
  FluxVector out = FluxVector::Zero(entries_.rows());
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    const double w = node_weights[static_cast<std::size_t>(j)];
    if (w != 0.0) out += w * entries_.col(j);
  }
  return out;
}

std::uint64_t observation_matrix_key(const Mesh& mesh, const ObservationPlan& plan, int modes) {
  std::uint64_t h = mix64(0x6f62736d61747278ULL);
  h = hash_double(h, mesh.domain().half_width);
  h = hash_double(h, mesh.spacing());
  h = mix64(h ^ static_cast<std::uint64_t>(modes));
  h = hash_double(h, plan.domain.half_width);
  h = mix64(h ^ plan.sensors.size());
  for (const auto& s : plan.sensors) {
    h = hash_double(h, s.location.x);
    h = hash_double(h, s.location.y);
  }
  h = mix64(h ^ plan.times.size());
  for (double t : plan.times) h = hash_double(h, t);
  return h;
}

ObservationMatrix assemble_observation_matrix(const Mesh& mesh, const ObservationPlan& plan,
                                              int modes) {
  const SeriesEvaluator series(plan, modes);
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(plan.obs_count()),
                          static_cast<Eigen::Index>(mesh.node_count()));
  for (std::size_t j = 0; j < mesh.node_count(); ++j) {
    entries.col(static_cast<Eigen::Index>(j)) = series.evaluate(mesh.node(j));
  }
  return ObservationMatrix(std::move(entries), observation_matrix_key(mesh, plan, modes));
}

void save_observation_matrix(const std::filesystem::path& path, const ObservationMatrix& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write observation matrix cache " + path.string());
  os.write(kCacheMagic, sizeof kCacheMagic);
  write_u64(os, m.key());
  write_u64(os, static_cast<std::uint64_t>(m.obs_count()));
  write_u64(os, static_cast<std::uint64_t>(m.node_count()));
  for (Eigen::Index r = 0; r < m.obs_count(); ++r) {
    for (Eigen::Index c = 0; c < m.node_count(); ++c) {
      write_u64(os, std::bit_cast<std::uint64_t>(m.entries()(r, c)));
    }
  }
}

ObservationMatrix load_observation_matrix(const std::filesystem::path& path,
                                          std::uint64_t expected_key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return {};
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) return {};
  std::uint64_t key = 0, rows = 0, cols = 0;
  if (!read_u64(is, key) || key != expected_key) return {};
  if (!read_u64(is, rows) || !read_u64(is, cols)) return {};
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < entries.rows(); ++r) {
    for (Eigen::Index c = 0; c < entries.cols(); ++c) {
      std::uint64_t bits = 0;
      if (!read_u64(is, bits)) return {};
      entries(r, c) = std::bit_cast<double>(bits);
    }
  }
  return ObservationMatrix(std::move(entries), key);
}

ObservationMatrix cached_observation_matrix(const std::filesystem::path& dir, const Mesh& mesh,
                                            const ObservationPlan& plan, int modes) {
  const std::uint64_t key = observation_matrix_key(mesh, plan, modes);
  char name[40];
  std::snprintf(name, sizeof name, "obs_%016llx.bin", static_cast<unsigned long long>(key));
  const auto path = dir / name;
  auto cached = load_observation_matrix(path, key);
  if (cached.obs_count() == static_cast<Eigen::Index>(plan.obs_count()) &&
      cached.node_count() == static_cast<Eigen::Index>(mesh.node_count())) {
    return cached;
  }
  auto fresh = assemble_observation_matrix(mesh, plan, modes);
  std::filesystem::create_directories(dir);
  save_observation_matrix(path, fresh);
  return fresh;
}

FluxVector forward_flux(const PointSourceSet& f, const ObservationMatrix& A, const Mesh& mesh) {
  if (A.node_count() != static_cast<Eigen::Index>(mesh.node_count())) {
    throw ConfigError("observation matrix does not match the mesh");
  }
  FluxVector out = FluxVector::Zero(A.obs_count());
  for (const auto& p : f.points) {
    const auto idx = mesh.index_of(p.location);
    if (!idx) throw DomainError("source is not on a mesh node; use direct evaluation");
    out += p.intensity * A.column(static_cast<Eigen::Index>(*idx));
  }
  return out;
}

FluxVector forward_flux(const PointSourceSet& f, const ObservationPlan& plan, int modes) {
  FluxVector out = FluxVector::Zero(static_cast<Eigen::Index>(plan.obs_count()));
  if (f.empty()) return out;
  const SeriesEvaluator series(plan, modes);
  for (const auto& p : f.points) out += p.intensity * series.evaluate(p.location);
  return out;
}

namespace {

/// Constant-coefficient tridiagonal solver for (1 + r) v_i - r/2 (v_{i-1} + v_{i+1}) = d_i,
/// applied to many independent lines at once.
class ImplicitLine {
 public:
  ImplicitLine(std::size_t n, double r) : diag_(n), upper_(n) {
    const double off = -0.5 * r;
    const double main = 1.0 + r;
    upper_[0] = off / main;
    diag_[0] = 1.0 / main;
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = main - off * upper_[i - 1];
      diag_[i] = 1.0 / denom;
      upper_[i] = off / denom;
    }
    off_ = off;
  }

  // Lines run along x: data[j * n + i], line j.
  void solve_rows(std::vector<double>& data, std::size_t n) const {
    for (std::size_t j = 0; j < n; ++j) {
      double* d = &data[j * n];
      d[0] *= diag_[0];
      for (std::size_t i = 1; i < n; ++i) d[i] = (d[i] - off_ * d[i - 1]) * diag_[i];
      for (std::size_t i = n - 1; i-- > 0;) d[i] -= upper_[i] * d[i + 1];
    }
  }

  // Lines run along y: data[j * n + i], line i; sweeps whole rows for locality.
  void solve_columns(std::vector<double>& data, std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) data[i] *= diag_[0];
    for (std::size_t j = 1; j < n; ++j) {
      double* cur = &data[j * n];
      const double* prev = &data[(j - 1) * n];
      for (std::size_t i = 0; i < n; ++i) cur[i] = (cur[i] - off_ * prev[i]) * diag_[j];
    }
    for (std::size_t j = n - 1; j-- > 0;) {
      double* cur = &data[j * n];
      const double* next = &data[(j + 1) * n];
      for (std::size_t i = 0; i < n; ++i) cur[i] -= upper_[j] * next[i];
    }
  }

 private:
  std::vector<double> diag_;
  std::vector<double> upper_;
  double off_ = 0.0;
};

double cubic_lagrange(const double* xs, const double* ys, double x) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double li = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i) li *= (x - xs[j]) / (xs[i] - xs[j]);
    }
    sum += li * ys[i];
  }
  return sum;
}

}  // namespace

FluxVector fd_oracle_flux(const PointSourceSet& f, const ObservationPlan& plan, int grid_n,
                          double dt) {
  if (grid_n < 64) throw ConfigError("finite-difference oracle needs grid_n >= 64");
  if (!(dt > 0.0) || dt > 1e-3) throw ConfigError("finite-difference oracle needs 0 < dt <= 1e-3");
  plan.validate();
  FluxVector out = FluxVector::Zero(static_cast<Eigen::Index>(plan.obs_count()));
  if (f.empty()) return out;

  const double a = plan.domain.half_width;
  const auto n = static_cast<std::size_t>(grid_n - 1);
  const double h = 2.0 * a / grid_n;
  std::vector<double> source(n * n, 0.0);
  for (const auto& p : f.points) {
    if (!plan.domain.contains(p.location)) throw DomainError("oracle source outside the domain");
    const auto col = std::lround((p.location.x + a) / h) - 1;
    const auto row = std::lround((p.location.y + a) / h) - 1;
    if (col < 0 || row < 0 || col >= static_cast<long>(n) || row >= static_cast<long>(n)) {
      throw DomainError("oracle source closer than one grid cell to the boundary");
    }
    source[static_cast<std::size_t>(row) * n + static_cast<std::size_t>(col)] +=
        p.intensity / (h * h);
  }

  std::vector<double> u(n * n, 0.0), half(n * n, 0.0);
  const auto at = [n](std::vector<double>& v, std::size_t i, std::size_t j) -> double& {
    return v[j * n + i];
  };

  // Outward normal derivative along one edge at tangential nodes k = 0..grid_n.
  const auto edge_profile = [&](Edge edge) {
    std::vector<double> prof(static_cast<std::size_t>(grid_n) + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t t = k - 1;
      double first = 0.0, second = 0.0;
      switch (edge) {
        case Edge::kEast:
          first = at(u, n - 1, t), second = at(u, n - 2, t);
          break;
        case Edge::kWest:
          first = at(u, 0, t), second = at(u, 1, t);
          break;
        case Edge::kNorth:
          first = at(u, t, n - 1), second = at(u, t, n - 2);
          break;
        case Edge::kSouth:
          first = at(u, t, 0), second = at(u, t, 1);
          break;
      }
      prof[k] = (second - 4.0 * first) / (2.0 * h);
    }
    return prof;
  };

  double t_prev = 0.0;
  for (std::size_t ti = 0; ti < plan.times.size(); ++ti) {
    const double span_t = plan.times[ti] - t_prev;
    const auto steps = std::max<long>(1, std::lround(std::ceil(span_t / dt - 1e-9)));
    const double dtl = span_t / static_cast<double>(steps);
    const double r = dtl / (h * h);
    const ImplicitLine solver(n, r);
    for (long step = 0; step < steps; ++step) {
      // Half step implicit in x.
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          const double down = j > 0 ? at(u, i, j - 1) : 0.0;
          const double up = j + 1 < n ? at(u, i, j + 1) : 0.0;
          const double c = at(u, i, j);
          at(half, i, j) = c + 0.5 * r * (up - 2.0 * c + down) + 0.5 * dtl * source[j * n + i];
        }
      }
      solver.solve_rows(half, n);
      // Half step implicit in y.
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          const double left = i > 0 ? at(half, i - 1, j) : 0.0;
          const double right = i + 1 < n ? at(half, i + 1, j) : 0.0;
          const double c = at(half, i, j);
          at(u, i, j) = c + 0.5 * r * (left - 2.0 * c + right) + 0.5 * dtl * source[j * n + i];
        }
      }
      solver.solve_columns(u, n);
    }
    t_prev = plan.times[ti];

    for (std::size_t s = 0; s < plan.sensors.size(); ++s) {
      const auto& sensor = plan.sensors[s];
      const auto prof = edge_profile(sensor.edge);
      const double tangent = (sensor.edge == Edge::kEast || sensor.edge == Edge::kWest)
                                 ? sensor.location.y
                                 : sensor.location.x;
      const double pos = (tangent + a) / h;
      const long base = std::clamp<long>(static_cast<long>(std::floor(pos)) - 1, 0, grid_n - 3);
      double xs[4], ys[4];
      for (int q = 0; q < 4; ++q) {
        xs[q] = static_cast<double>(base + q);
        ys[q] = prof[static_cast<std::size_t>(base + q)];
      }
      const double value = cubic_lagrange(xs, ys, pos);
      if (!std::isfinite(value)) throw NumericalError("finite-difference oracle produced NaN");
      out[static_cast<Eigen::Index>(plan.index(s, ti))] = value;
    }
  }
  return out;
}

}  // namespace heatsrc
