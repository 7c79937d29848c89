#include "snls/corpus.hpp"

#include <cmath>

#include "snls/errors.hpp"

namespace snls {

Field random_smooth_field(const GridPtr& grid, RandomStream& rng, double kappa, double mass,
                          bool mean_zero) {
  if (!(kappa > 0.0)) throw DomainError("random_smooth_field: kappa must be positive");
  Field u(grid, Representation::spectral);
  auto v = u.values();
  const auto k2 = grid->k_squared();
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sd = std::exp(-k2[i] / (4.0 * kappa * kappa));
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = (mean_zero && i == 0) ? Complex(0.0) : Complex(re, im) * sd;
    total += std::norm(v[i]);
  }
  if (total > 0.0) u *= std::sqrt(mass / total);
  u.to_physical();
  return u;
}

Field gaussian_bump(const GridPtr& grid, double width, double amplitude,
                    std::span<const double> center) {
  return sample_field(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double c = a < center.size() ? center[a] : 0.0;
      r2 += (x[a] - c) * (x[a] - c);
    }
    return Complex(amplitude * std::exp(-r2 / (2.0 * width * width)), 0.0);
  });
}

std::vector<Field> smooth_corpus(const GridPtr& grid, std::size_t count, std::uint64_t seed,
                                 StreamRole role, double kappa_smooth, double kappa_rough,
                                 bool mean_zero) {
  std::vector<Field> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream rng = RandomStream::derive(seed, role, i);
    const double mass = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    out.push_back(
        random_smooth_field(grid, rng, i % 2 == 0 ? kappa_smooth : kappa_rough, mass, mean_zero));
  }
  return out;
}

}  // namespace snls
