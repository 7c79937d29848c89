#pragma once

// Mass, energy, modified energy and the Gagliardo-Nirenberg machinery.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

/// M(u) = ||u||_H^2.
double mass(const Field& u);

/// integral of |u|^{2+2 sigma}.
double potential_integral(const Field& u, double sigma);

/// H(u) = 1/2 ||grad u||^2 - alpha / (2(1+sigma)) ||u||_{2+2 sigma}^{2+2 sigma}.
double energy(const Field& u, double sigma, int alpha);

/// Exponent 1 + 2 sigma / (2 - sigma d) of the mass correction.
/// Throws DomainError unless sigma d < 2.
double modified_energy_exponent(double sigma, int d);

/// Focusing energy plus G * M(u)^{1 + 2 sigma/(2 - sigma d)}; d taken from the grid.
double modified_energy(const Field& u, double sigma, double g);

/// ||u||_V^2 = ||grad u||^2 + ||u||^2.
double v_norm_sq(const Field& u);

/// ||u||_{L^inf}^{2 sigma} over grid samples.
double linf_power(const Field& u, double sigma);

/// theta = sigma d / (2 (1 + sigma)); DomainError unless 0 < theta < 1.
double gn_theta(double sigma, int d);

/// ||u||_{2+2 sigma} / (||u||_2^{1-theta} ||grad u||_2^theta). Invariant under
/// dilations and scalings; DomainError for the zero field, +inf for constants.
double weinstein_quotient(const Field& u, double sigma);

/// The constant G in
///   1/(2(1+sigma)) ||u||^{2+2sigma}_{2+2sigma} <= 1/4 ||grad u||^2 + G ||u||^{2+4sigma/(2-sigma d)}
/// obtained from a GN constant by the weighted Young inequality with exponents
/// 2/(sigma d) and 2/(2 - sigma d). Requires 0 < sigma d < 2.
double young_split_constant(double c_gn, double sigma, int d);

struct GnOptions {
  double step = 1e-2;
  int iterations = 500;
  int restarts = 16;  ///< random smooth starts, in addition to the Gaussian start
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double gaussian_width = 1.0;
  double kappa = 1.0;  ///< spectral width of the random starts
  /// Iterates keep only |k| <= band_fraction * (axis Nyquist wavenumber), so
  /// the ascent cannot collapse onto grid-scale profiles.
  double band_fraction = 0.5;
};

struct GNEstimate {
  double sigma = 0.0;
  int d = 0;
  double theta = 0.0;
  double c_gn = 0.0;
  std::optional<double> g;  ///< only when sigma d < 2
  bool converged = false;
  std::string warning;
  std::vector<double> restart_best;     ///< final quotient per start; [0] is the Gaussian start
  std::vector<double> objective_trace;  ///< quotient per accepted iteration of the winning start
};

/// Multi-start preconditioned gradient ascent of the Weinstein quotient over
/// mean-zero, unit-mass, band-limited fields. Never silently unconverged: `converged` is
/// false and `warning` set when the budget runs out while still improving.
GNEstimate estimate_gn_constant(const GridPtr& grid, double sigma, const GnOptions& options = {});

struct GnCorpusCheck {
  std::size_t fields = 0;
  double max_quotient = 0.0;
  std::size_t quotient_violations = 0;  ///< fields with quotient above C_gn
  std::size_t energy_violations = 0;    ///< fields with modified energy below 1/4 ||grad u||^2
  bool energy_checked = false;          ///< false when no G is available

  bool passed() const { return quotient_violations == 0 && energy_violations == 0; }
};

/// Sweeps `count` mean-zero smooth fields (hold-out stream, masses in [0.1, 10])
/// against C_gn and, when the estimate carries G, against the modified-energy
/// lower bound.
GnCorpusCheck verify_gn_corpus(const GridPtr& grid, const GNEstimate& estimate, std::size_t count,
                               std::uint64_t seed, unsigned workers = 1);

}  // namespace snls
