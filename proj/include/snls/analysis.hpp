#pragma once

// Monte Carlo moment estimation, the shared-noise synchronization experiment
// and ergodic time averages.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/grid.hpp"
#include "snls/noise.hpp"

namespace snls {

/// E M(u(t)) = e^{-2 lambda t} M0 + ||Phi||^2_{HS(U;H)} (1 - e^{-2 lambda t}) / (2 lambda).
/// hs_h_sq is ||Phi||^2_{HS(U;H)}. lambda <= 0 is a DomainError unless
/// allow_undamped, in which case lambda = 0 gives M0 + ||Phi||^2 t.
double exact_mean_mass(double t, double m0, double lambda, double hs_h_sq,
                       bool allow_undamped = false);

/// ||Phi||_V^2 + ||Phi||_V^{2+2 sigma} lambda^{-sigma}.
double phi1(double sigma, double lambda, double hs_v);

/// ||Phi||_H^{2e} (lambda^{-e} + 1) + ||grad Phi||_H^2 with e = 1 + 2 sigma/(2 - sigma d).
double phi2_m1(int d, double sigma, double lambda, double hs_h, double hs_grad_h);

/// Standard observables by name: "one", "mass", "energy", "modified_energy",
/// "v_norm_sq", "linf_pow" (||u||_inf^{2 sigma}). "modified_energy" needs g.
Observable named_observable(const std::string& name, double sigma, int alpha,
                            std::optional<double> g = std::nullopt);

// ---------------------------------------------------------------------------

/// One bound of the form  obs(t) <= transient(t) + C * scale  (additive), or
/// obs(t) <= C * (transient(t) + scale)  (multiplicative, for "<~" bounds).
struct BoundCheck {
  std::string observable;
  int power = 1;
  bool multiplicative = false;
  double c_least_squares = 0.0;  ///< unconstrained log-residual least squares
  double c_fit = 0.0;            ///< max(c_least_squares, smallest C that bounds every time)
  bool holds = false;            ///< finite positive c_fit bounds every logged time
  std::size_t ls_violations = 0; ///< logged times the unconstrained fit would miss
};

/// Fit-then-verify of the bound form. transient and observed are per logged time.
BoundCheck fit_bound(std::span<const double> observed, std::span<const double> transient,
                     double scale, bool multiplicative);

struct MomentSeries {
  std::string observable;
  int power = 1;
  std::vector<double> mean;
  std::vector<double> standard_error;  ///< sample SD / sqrt(N)
};

struct MomentOptions {
  std::vector<int> powers{1};
  std::size_t paths = 100;
  unsigned workers = 1;
  std::optional<double> g;  ///< modified-energy constant; enables focusing fits
  double max_excluded_fraction = 0.01;
};

struct MomentReport {
  std::vector<double> times;
  std::vector<MomentSeries> series;
  std::size_t paths_requested = 0;
  std::size_t paths_used = 0;
  std::size_t paths_excluded = 0;
  bool failed = false;  ///< too many blow-ups
  std::vector<double> exact_mean_mass;
  double max_mass_deviation = 0.0;      ///< max |mean - exact|
  double max_mass_relative_deviation = 0.0;
  double max_mass_deviation_in_se = 0.0;
  std::vector<BoundCheck> bounds;

  const MomentSeries* find(const std::string& observable, int power) const;
};

/// Ensemble of params.seed-derived paths from u0, logged on the params grid.
MomentReport mc_moments(const Field& u0, const SimParams& params, const NoiseOperator* noise,
                        const MomentOptions& options);

/// At every logged time |mean M - exact| <= max(z SE, relative * exact).
/// False when the report carries no exact series.
bool mass_identity_holds(const MomentReport& report, double z = 3.0, double relative = 0.02);

// ---------------------------------------------------------------------------

struct SyncReport {
  std::vector<double> times;
  std::vector<double> w_sq;       ///< ||u1 - u2||_H^2
  std::vector<double> r;          ///< running average of ||u1||_inf^{2s} + ||u2||_inf^{2s}
  std::vector<double> envelope;   ///< ||w(0)||^2 exp(-2 t (lambda - r(t)))
  std::vector<double> margin;     ///< lambda - r(t)
  std::size_t violations = 0;
  bool envelope_holds = true;
  double tolerance = 1e-3;
  double decay_rate = 0.0;        ///< -slope of least-squares line through log w_sq
  double min_margin = 0.0;        ///< min over logged t > 0 of lambda - r(t)
  double time_average_linf[2] = {0.0, 0.0};  ///< per trajectory, over [0, T]
  double trajectory_margin[2] = {0.0, 0.0};  ///< lambda - 2 * time_average_linf
};

/// Two trajectories from x1 and x2 driven by one noise realization drawn from
/// `stream`, for params.step_count() steps. r(t) integrates per-step L^inf
/// values with the trapezoid rule; the report rows sit on the log grid.
SyncReport sync_experiment(const Field& x1, const Field& x2, const SimParams& params,
                           const NoiseOperator* noise, RandomStream stream,
                           double tolerance = 1e-3);

/// Aggregate over an ensemble of synchronization pairs.
struct SyncSummary {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double min_trajectory_margin = 0.0;  ///< over pairs and both trajectories
  double min_decay_rate = 0.0;
  bool large_damping = false;          ///< min_trajectory_margin >= margin_threshold
  bool rate_ok = false;                ///< every decay rate >= (1 - rate_slack) * 2 * min margin
};

SyncSummary summarize_sync(std::span<const SyncReport> reports, double margin_threshold = 0.5,
                           double rate_slack = 0.1);

// ---------------------------------------------------------------------------

struct BirkhoffOptions {
  std::optional<double> burn_in;  ///< default max(10/lambda, T/10)
  std::size_t batches = 20;
};

struct BirkhoffReport {
  std::string observable;
  std::vector<double> times;            ///< logged times after burn-in
  std::vector<double> running_average;  ///< A(t) over [burn_in, t]
  double average = 0.0;
  double standard_error = 0.0;          ///< batch means
  double burn_in = 0.0;
  std::size_t batches = 0;
  std::optional<double> uniqueness_margin;  ///< lambda - 2 A(T) for "linf_pow"
};

double default_burn_in(double lambda, double horizon);

/// Time averages of each observable along one path; one report per observable.
std::vector<BirkhoffReport> birkhoff_averages(const Field& x0, const SimParams& params,
                                              const NoiseOperator* noise,
                                              std::span<const Observable> observables,
                                              RandomStream stream,
                                              const BirkhoffOptions& options = {});

BirkhoffReport birkhoff_average(const Field& x0, const SimParams& params,
                                const NoiseOperator* noise, const Observable& observable,
                                RandomStream stream, const BirkhoffOptions& options = {});

/// Time average over [burn_in, T] of logged samples (trapezoid) with batch-means SE.
BirkhoffReport time_average(std::span<const double> times, std::span<const double> values,
                            double burn_in, std::size_t batches);

// ---------------------------------------------------------------------------

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct SweepRow {
  double lambda = 0.0;
  Estimate v_norm_sq;
  Estimate linf_pow;
  Estimate mass;
  double mass_target = 0.0;  ///< ||Phi||^2_{HS(U;H)} / (2 lambda)
  bool mass_matches = false; ///< within 3 SE
};

struct SweepOptions {
  std::size_t paths = 4;
  unsigned workers = 1;
  std::size_t batches = 20;
  double z = 2.0;  ///< CI half-width in SEs for the ordering verdict
  std::optional<double> burn_in;  ///< default per lambda: max(10/lambda, T/10)
};

struct SweepReport {
  std::vector<SweepRow> rows;  ///< sorted by lambda
  std::optional<bool> v_norm_nonincreasing;  ///< absent for a single lambda
  std::optional<bool> linf_nonincreasing;
  bool mass_matches = true;
};

/// Stationary estimates per lambda; params.t_final is the horizon of every path.
SweepReport lambda_sweep(const Field& x0, const SimParams& params, const NoiseOperator& noise,
                         std::span<const double> lambdas, const SweepOptions& options = {});

/// Every consecutive pair satisfies est[i+1] <= est[i] + z * combined SE.
bool ci_nonincreasing(std::span<const Estimate> estimates, double z);

}  // namespace snls
