#pragma once

// Random smooth test fields shared by the constant-estimation sweeps.

#include <cstdint>
#include <vector>

#include "snls/grid.hpp"
#include "snls/rng.hpp"

namespace snls {

/// Gaussian random field: independent complex normal coefficients with
/// standard deviation exp(-|k|^2 / (4 kappa^2)), rescaled to the given mass.
/// mean_zero drops the constant mode (the k = 0 draws are still consumed).
Field random_smooth_field(const GridPtr& grid, RandomStream& rng, double kappa, double mass,
                          bool mean_zero = false);

/// amplitude * exp(-|x - center|^2 / (2 width^2)), sampled on the grid.
Field gaussian_bump(const GridPtr& grid, double width, double amplitude,
                    std::span<const double> center = {});

/// `count` fields alternating between the two smoothness levels; the mass of
/// each is log-uniform in [0.1, 10]. Field i uses its own derived stream.
std::vector<Field> smooth_corpus(const GridPtr& grid, std::size_t count, std::uint64_t seed,
                                 StreamRole role, double kappa_smooth, double kappa_rough,
                                 bool mean_zero = false);

}  // namespace snls
