#include "heatsrc/rng.hpp"

#include <cmath>

#include "heatsrc/errors.hpp"

namespace heatsrc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t root_seed, std::uint64_t tag) {
  return Rng(mix64(mix64(root_seed) ^ mix64(tag * 0x632be59bd9b4e019ULL)));
}

Rng Rng::stream(std::uint64_t root_seed, StreamPurpose purpose) {
  return stream(root_seed, static_cast<std::uint64_t>(purpose));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
}

// Marsaglia polar method.
double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

// Sequential inversion; mean is split into chunks so exp(-mean) never underflows.
std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw ConfigError("poisson mean must be finite and non-negative");
  }
  constexpr double kChunk = 200.0;
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double m = mean > kChunk ? kChunk : mean;
    mean -= m;
    const double u = uniform();
    double p = std::exp(-m);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= m / static_cast<double>(k);
      const double next = cdf + p;
      if (next == cdf) break;
      cdf = next;
    }
    total += k;
  }
  return total;
}

}  // namespace heatsrc
