#pragma once

// Hand-rolled generators and comparison helpers for the property tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "snls/corpus.hpp"
#include "snls/grid.hpp"
#include "snls/noise.hpp"
#include "snls/rng.hpp"

namespace snls::testing {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double uniform(RandomStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline double log_uniform(RandomStream& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

/// Smooth field with random spectral width, random mass in [1e-2, 1e2] and a
/// random global phase.
inline Field random_field(const GridPtr& grid, RandomStream& rng) {
  const double kappa = uniform(rng, 0.4, 3.0);
  const double mass = log_uniform(rng, 1e-2, 1e2);
  Field u = random_smooth_field(grid, rng, kappa, mass);
  u *= std::polar(1.0, uniform(rng, 0.0, 6.283185307179586));
  return u;
}

/// Every spectral coefficient independent complex normal: a rough field.
inline Field white_field(const GridPtr& grid, RandomStream& rng) {
  Field u(grid, Representation::spectral);
  for (auto& v : u.values()) v = Complex(rng.normal(), rng.normal());
  u.to_physical();
  return u;
}

/// Integer mode with each entry uniform in [-bound, bound].
inline std::vector<int> random_mode(RandomStream& rng, int d, int bound) {
  std::vector<int> m(d);
  for (auto& x : m) x = static_cast<int>(rng() % static_cast<std::uint64_t>(2 * bound + 1)) - bound;
  return m;
}

/// Distinct random modes with random complex amplitudes.
inline std::vector<NoiseEntry> random_entries(RandomStream& rng, int d, std::size_t count, int bound) {
  std::vector<NoiseEntry> out;
  while (out.size() < count) {
    auto m = random_mode(rng, d, bound);
    bool dup = false;
    for (const auto& e : out) dup = dup || e.mode == m;
    if (dup) continue;
    out.push_back({m, Complex(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))});
  }
  return out;
}

/// exp(i k . (x - x0)) evaluated directly at a physical point, for oracles.
inline Complex plane_wave(const Grid& g, const std::vector<int>& mode, std::span<const double> x) {
  double phase = 0.0;
  for (int a = 0; a < g.dim(); ++a) phase += 2.0 * M_PI * mode[a] / g.length() * (x[a] + 0.5 * g.length());
  return std::polar(1.0, phase);
}

inline double mode_k2(const Grid& g, const std::vector<int>& mode) {
  double k2 = 0.0;
  for (int m : mode) k2 += std::pow(2.0 * M_PI * m / g.length(), 2);
  return k2;
}

}  // namespace snls::testing
