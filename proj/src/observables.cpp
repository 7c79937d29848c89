#include "snls/observables.hpp"

#include <cmath>
#include <numbers>

#include "snls/corpus.hpp"
#include "snls/errors.hpp"
#include "snls/parallel.hpp"
#include "snls/rng.hpp"

namespace snls {

double mass(const Field& u) {
  const double n = lp_norm(u, 2.0);
  return n * n;
}

double potential_integral(const Field& u, double sigma) { return lp_integral(u, 2.0 + 2.0 * sigma); }

double energy(const Field& u, double sigma, int alpha) {
  return 0.5 * gradient_norm_sq(u) -
         static_cast<double>(alpha) / (2.0 * (1.0 + sigma)) * potential_integral(u, sigma);
}

double modified_energy_exponent(double sigma, int d) {
  if (!(sigma * d < 2.0)) throw DomainError("modified energy requires sigma * d < 2");
  return 1.0 + 2.0 * sigma / (2.0 - sigma * d);
}

double modified_energy(const Field& u, double sigma, double g) {
  const double exponent = modified_energy_exponent(sigma, u.grid().dim());
  return energy(u, sigma, +1) + g * std::pow(mass(u), exponent);
}

double v_norm_sq(const Field& u) { return gradient_norm_sq(u) + mass(u); }

double linf_power(const Field& u, double sigma) { return std::pow(lp_norm(u, kInfinity), 2.0 * sigma); }

double gn_theta(double sigma, int d) {
  const double theta = sigma * d / (2.0 * (1.0 + sigma));
  if (!(theta > 0.0 && theta < 1.0))
    throw DomainError("Gagliardo-Nirenberg exponent requires 0 < sigma d < 2 (sigma + 1)");
  return theta;
}

double weinstein_quotient(const Field& u, double sigma) {
  const double theta = gn_theta(sigma, u.grid().dim());
  const double m = mass(u);
  if (m == 0.0) throw DomainError("weinstein_quotient: zero field");
  const double grad = gradient_norm_sq(u);
  if (grad == 0.0) return kInfinity;
  const double lq = lp_norm(u, 2.0 + 2.0 * sigma);
  return lq / (std::pow(m, 0.5 * (1.0 - theta)) * std::pow(grad, 0.5 * theta));
}

double young_split_constant(double c_gn, double sigma, int d) {
  const double sd = sigma * d;
  if (!(sd > 0.0 && sd < 2.0)) throw DomainError("Young split requires 0 < sigma d < 2");
  if (!(c_gn > 0.0)) throw DomainError("Young split requires a positive GN constant");
  // K |grad u|^{sigma d} |u|^{2+2sigma-sigma d} <= 1/4 |grad u|^2 + G |u|^{...}
  const double k = std::pow(c_gn, 2.0 + 2.0 * sigma) / (2.0 * (1.0 + sigma));
  const double p = 2.0 / sd;
  const double q = 2.0 / (2.0 - sd);
  const double delta = std::pow(p / 4.0, 1.0 / p);
  return std::pow(k / delta, q) / q;
}

// ---------------------------------------------------------------------------

namespace {

struct AscentResult {
  double best = 0.0;
  bool converged = false;
  std::vector<double> trace;
};

// Mean zero, modes above the band limit removed, unit mass.
void project(Field& u, double band_k2) {
  u.to_spectral();
  u.values()[0] = 0.0;
  const auto k2 = u.grid().k_squared();
  for (std::size_t i = 0; i < k2.size(); ++i)
    if (k2[i] > band_k2) u.values()[i] = 0.0;
  double total = 0.0;
  for (const auto& v : u.values()) total += std::norm(v);
  u *= 1.0 / std::sqrt(total);
  u.to_physical();
}

double log_quotient(const Field& u, double sigma) { return std::log(weinstein_quotient(u, sigma)); }

// Sobolev-preconditioned L^2 gradient of log(quotient), normalized to unit H-norm.
Field ascent_direction(const Field& u, double sigma, double theta, double band_k2) {
  const double q = 2.0 + 2.0 * sigma;
  const double m = mass(u);
  const double grad = gradient_norm_sq(u);
  const double sq = lp_integral(u, q);

  Field minus_lap = apply_multiplier(u, [](double k2) { return k2; });
  Field g(u.grid_ptr());
  auto gv = g.values();
  const auto uv = u.values();
  const auto lv = minus_lap.values();
  for (std::size_t i = 0; i < gv.size(); ++i) {
    gv[i] = std::pow(std::abs(uv[i]), q - 2.0) * uv[i] / sq - (1.0 - theta) * uv[i] / m -
            theta * lv[i] / grad;
  }
  g.to_spectral();
  auto sv = g.values();
  const auto k2 = u.grid().k_squared();
  double total = 0.0;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    sv[i] = k2[i] > band_k2 ? Complex(0.0) : sv[i] / (1.0 + k2[i]);
    total += std::norm(sv[i]);
  }
  sv[0] = 0.0;
  if (total > 0.0) g *= 1.0 / std::sqrt(total);
  g.to_physical();
  return g;
}

AscentResult ascend(Field u, double sigma, const GnOptions& opt) {
  const double theta = gn_theta(sigma, u.grid().dim());
  const double nyquist = std::numbers::pi * u.grid().points_per_axis() / u.grid().length();
  const double band_k2 = std::pow(opt.band_fraction * nyquist, 2);
  project(u, band_k2);
  double objective = log_quotient(u, sigma);
  double eta = opt.step;
  AscentResult out;
  out.trace.push_back(std::exp(objective));
  std::size_t stalled_since = 0;
  double reference = objective;
  for (int it = 0; it < opt.iterations; ++it) {
    const Field dir = ascent_direction(u, sigma, theta, band_k2);
    bool accepted = false;
    for (int halving = 0; halving < 30 && !accepted; ++halving) {
      Field trial = u;
      auto tv = trial.values();
      const auto dv = dir.values();
      for (std::size_t i = 0; i < tv.size(); ++i) tv[i] += eta * dv[i];
      project(trial, band_k2);
      const double value = log_quotient(trial, sigma);
      if (value > objective) {
        u = std::move(trial);
        objective = value;
        accepted = true;
        eta = std::min(eta * 1.25, 10.0 * opt.step);
      } else {
        eta *= 0.5;
      }
    }
    if (!accepted) {
      out.converged = true;  // no ascent at any resolvable step length
      break;
    }
    out.trace.push_back(std::exp(objective));
    if (++stalled_since >= 50) {
      if (objective - reference < 1e-7) {
        out.converged = true;
        break;
      }
      reference = objective;
      stalled_since = 0;
    }
  }
  out.best = std::exp(objective);
  return out;
}

}  // namespace

GNEstimate estimate_gn_constant(const GridPtr& grid, double sigma, const GnOptions& options) {
  GNEstimate est;
  est.sigma = sigma;
  est.d = grid->dim();
  est.theta = gn_theta(sigma, grid->dim());
  const std::size_t starts = static_cast<std::size_t>(options.restarts) + 1;
  std::vector<AscentResult> results(starts);
  parallel_for(starts, options.workers, [&](std::size_t r) {
    Field start = r == 0 ? gaussian_bump(grid, options.gaussian_width, 1.0)
                         : [&] {
                             RandomStream rng =
                                 RandomStream::derive(options.seed, StreamRole::gn_restart, r);
                             return random_smooth_field(grid, rng, options.kappa, 1.0);
                           }();
    results[r] = ascend(std::move(start), sigma, options);
  });
  std::size_t winner = 0;
  for (std::size_t r = 0; r < starts; ++r) {
    est.restart_best.push_back(results[r].best);
    if (results[r].best > results[winner].best) winner = r;
  }
  est.c_gn = results[winner].best;
  est.converged = results[winner].converged;
  est.objective_trace = results[winner].trace;
  if (!est.converged)
    est.warning = "iteration budget exhausted while the winning start was still improving";
  if (sigma * grid->dim() < 2.0) est.g = young_split_constant(est.c_gn, sigma, grid->dim());
  return est;
}

GnCorpusCheck verify_gn_corpus(const GridPtr& grid, const GNEstimate& estimate, std::size_t count,
                               std::uint64_t seed, unsigned workers) {
  std::vector<double> quotient(count), slack(count);
  parallel_for(count, workers, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(seed, StreamRole::corpus_holdout, i);
    const double m = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    const Field u = random_smooth_field(grid, rng, i % 2 == 0 ? 1.0 : 2.0, m, true);
    quotient[i] = weinstein_quotient(u, estimate.sigma);
    if (estimate.g) slack[i] = modified_energy(u, estimate.sigma, *estimate.g) - 0.25 * gradient_norm_sq(u);
  });
  GnCorpusCheck out;
  out.fields = count;
  out.energy_checked = estimate.g.has_value();
  for (std::size_t i = 0; i < count; ++i) {
    out.max_quotient = std::max(out.max_quotient, quotient[i]);
    if (quotient[i] > estimate.c_gn) ++out.quotient_violations;
    if (out.energy_checked && slack[i] < 0.0) ++out.energy_violations;
  }
  return out;
}

}  // namespace snls
