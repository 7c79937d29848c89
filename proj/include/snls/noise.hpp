#pragma once

// Additive noise Phi dW realized on finitely many plane waves.
//
// Entry j contributes Phi e_j = a_j * exp(i k_j . (x - x_0)) / sqrt(Vol), so
// ||Phi e_j||_H = |a_j| and its only nonzero spectral coefficient is a_j.
// Under the two-per-mode convention each entry is driven by two independent
// real Brownian motions, one per quadrature:
//     dc_j = a_j (dW_j' + i dW_j'') / sqrt(2),
// so each of Re dc_j, Im dc_j has variance |a_j|^2 dt / 2 (real a_j) and
// E|dc_j|^2 = |a_j|^2 dt. Under one-per-mode, dc_j = a_j dW_j.

#include <cstddef>
#include <vector>

#include "snls/grid.hpp"
#include "snls/rng.hpp"

namespace snls {

enum class NoiseConvention { two_per_mode, one_per_mode };

struct NoiseEntry {
  std::vector<int> mode;  ///< integer mode index per axis, each in [-n/2, n/2]
  Complex amplitude;

  friend bool operator==(const NoiseEntry&, const NoiseEntry&) = default;
};

enum class NoiseSpace { H, V, gradH };

class NoiseOperator {
 public:
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<NoiseEntry>& entries() const { return entries_; }
  NoiseConvention convention() const { return convention_; }

  /// Flat spectral index of each entry, parallel to entries().
  const std::vector<std::size_t>& spectral_indices() const { return indices_; }

  double hs_norm(NoiseSpace space) const;
  double hs_norm_sq(NoiseSpace space) const;

  /// Adds one increment sum_j dW_j Phi e_j to a spectral-representation field.
  void add_increment(Field& spectral, double dt, RandomStream& rng) const;

  /// Same operator with every amplitude multiplied by exp(i theta).
  NoiseOperator rotated(double theta) const;

 private:
  friend NoiseOperator build_noise(GridPtr, std::vector<NoiseEntry>, NoiseConvention);
  NoiseOperator() = default;

  GridPtr grid_;
  std::vector<NoiseEntry> entries_;
  std::vector<std::size_t> indices_;
  NoiseConvention convention_ = NoiseConvention::two_per_mode;
  double h_sq_ = 0.0;
  double grad_sq_ = 0.0;
  double v_sq_ = 0.0;
};

/// Throws ConfigError on an empty list, an invalid mode or a duplicate mode.
NoiseOperator build_noise(GridPtr grid, std::vector<NoiseEntry> entries,
                          NoiseConvention convention = NoiseConvention::two_per_mode);

/// Increment field in spectral representation. Throws DomainError for dt < 0.
Field sample_increment(const NoiseOperator& noise, double dt, RandomStream& rng);

}  // namespace snls
