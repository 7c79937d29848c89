#include "snls/analysis.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "snls/errors.hpp"
#include "snls/observables.hpp"
#include "snls/parallel.hpp"

namespace snls {

double exact_mean_mass(double t, double m0, double lambda, double hs_h_sq, bool allow_undamped) {
  if (!(t >= 0.0)) throw DomainError("exact_mean_mass: t must be >= 0");
  if (lambda == 0.0 && allow_undamped) return m0 + hs_h_sq * t;
  if (!(lambda > 0.0)) throw DomainError("exact_mean_mass: lambda must be > 0");
  const double decay = std::exp(-2.0 * lambda * t);
  return decay * m0 + hs_h_sq * (-std::expm1(-2.0 * lambda * t)) / (2.0 * lambda);
}

double phi1(double sigma, double lambda, double hs_v) {
  if (!(lambda > 0.0)) throw DomainError("phi1: lambda must be > 0");
  return hs_v * hs_v + std::pow(hs_v, 2.0 + 2.0 * sigma) * std::pow(lambda, -sigma);
}

double phi2_m1(int d, double sigma, double lambda, double hs_h, double hs_grad_h) {
  if (!(lambda > 0.0)) throw DomainError("phi2: lambda must be > 0");
  const double e = modified_energy_exponent(sigma, d);
  return std::pow(hs_h, 2.0 * e) * (std::pow(lambda, -e) + 1.0) + hs_grad_h * hs_grad_h;
}

Observable named_observable(const std::string& name, double sigma, int alpha, std::optional<double> g) {
  if (name == "one") return {name, [](const Field&) { return 1.0; }};
  if (name == "mass") return {name, [](const Field& u) { return mass(u); }};
  if (name == "energy") return {name, [=](const Field& u) { return energy(u, sigma, alpha); }};
  if (name == "v_norm_sq") return {name, [](const Field& u) { return v_norm_sq(u); }};
  if (name == "linf_pow") return {name, [=](const Field& u) { return linf_power(u, sigma); }};
  if (name == "modified_energy") {
    if (!g) throw ConfigError("observable modified_energy needs the constant G");
    const double gv = *g;
    return {name, [=](const Field& u) { return modified_energy(u, sigma, gv); }};
  }
  throw ConfigError("unknown observable '" + name + "'");
}

// ---------------------------------------------------------------------------

BoundCheck fit_bound(std::span<const double> observed, std::span<const double> transient,
                     double scale, bool multiplicative) {
  BoundCheck out;
  out.multiplicative = multiplicative;
  if (observed.size() != transient.size()) throw DomainError("fit_bound: length mismatch");
  if (!(scale > 0.0)) throw DomainError("fit_bound: scale must be positive");

  auto bound = [&](std::size_t t, double c) {
    return multiplicative ? c * (transient[t] + scale) : transient[t] + c * scale;
  };
  double c_min = 0.0;
  std::vector<std::size_t> used;
  for (std::size_t t = 0; t < observed.size(); ++t) {
    const double needed = multiplicative ? observed[t] / (transient[t] + scale)
                                         : (observed[t] - transient[t]) / scale;
    c_min = std::max(c_min, needed);
    if (observed[t] > 0.0 && std::isfinite(observed[t])) used.push_back(t);
  }

  if (used.empty()) {
    out.c_least_squares = c_min;
  } else if (multiplicative) {
    double s = 0.0;
    for (auto t : used) s += std::log(observed[t]) - std::log(transient[t] + scale);
    out.c_least_squares = std::exp(s / static_cast<double>(used.size()));
  } else {
    auto objective = [&](double log_c) {
      const double c = std::exp(log_c);
      double sum = 0.0;
      for (auto t : used) {
        const double r = std::log(bound(t, c)) - std::log(observed[t]);
        sum += r * r;
      }
      return sum;
    };
    const double centre = std::log(std::max(c_min, 1e-12));
    const auto [log_c, value] =
        boost::math::tools::brent_find_minima(objective, centre - 40.0, centre + 40.0, 40);
    (void)value;
    out.c_least_squares = std::exp(log_c);
  }
  out.c_fit = std::max(out.c_least_squares, c_min);
  for (std::size_t t = 0; t < observed.size(); ++t)
    if (observed[t] > bound(t, out.c_least_squares)) ++out.ls_violations;
  out.holds = std::isfinite(out.c_fit) && out.c_fit > 0.0;
  for (std::size_t t = 0; t < observed.size() && out.holds; ++t)
    out.holds = observed[t] <= bound(t, out.c_fit) * (1.0 + 1e-12);
  return out;
}

const MomentSeries* MomentReport::find(const std::string& observable, int power) const {
  for (const auto& s : series)
    if (s.observable == observable && s.power == power) return &s;
  return nullptr;
}

MomentReport mc_moments(const Field& u0, const SimParams& params, const NoiseOperator* noise,
                        const MomentOptions& options) {
  params.validate();
  if (options.paths < 2) throw ConfigError("experiment.paths: need at least 2 paths");
  const int d = u0.grid().dim();
  const bool focusing_fits = params.alpha == 1 && options.g && params.sigma * d < 2.0;

  std::vector<Observable> observers{named_observable("mass", params.sigma, params.alpha),
                                    named_observable("energy", params.sigma, params.alpha),
                                    named_observable("v_norm_sq", params.sigma, params.alpha)};
  if (params.alpha == 1 && options.g && params.sigma * d < 2.0)
    observers.push_back(named_observable("modified_energy", params.sigma, params.alpha, options.g));

  const Integrator check(u0.grid_ptr(), params, noise);  // validates noise/grid pairing
  (void)check;

  std::vector<std::optional<TrajectoryLog>> logs(options.paths);
  parallel_for(options.paths, options.workers, [&](std::size_t p) {
    State s{u0.physical_copy(), 0.0, RandomStream::derive(params.seed, StreamRole::path, p)};
    try {
      logs[p] = evolve(std::move(s), params, noise, observers).log;
    } catch (const BlowUpError&) {
      logs[p].reset();
    }
  });

  MomentReport report;
  report.paths_requested = options.paths;
  for (const auto& l : logs) {
    if (l) {
      ++report.paths_used;
      if (report.times.empty()) report.times = l->times;
    } else {
      ++report.paths_excluded;
    }
  }
  report.failed = static_cast<double>(report.paths_excluded) >
                  options.max_excluded_fraction * static_cast<double>(options.paths);
  if (report.paths_used < 2) {
    report.failed = true;
    return report;
  }

  const std::size_t nt = report.times.size();
  for (std::size_t j = 0; j < observers.size(); ++j) {
    for (int m : options.powers) {
      if (m < 1) throw ConfigError("experiment.powers: powers must be >= 1");
      MomentSeries series{observers[j].name, m, std::vector<double>(nt), std::vector<double>(nt)};
      for (std::size_t t = 0; t < nt; ++t) {
        // Welford in path order: exact zero spread for identical paths
        double mean = 0.0, m2 = 0.0;
        std::size_t n = 0;
        for (const auto& l : logs) {
          if (!l) continue;
          const double x = std::pow(l->rows[t][j], m);
          ++n;
          const double delta = x - mean;
          mean += delta / static_cast<double>(n);
          m2 += delta * (x - mean);
        }
        series.mean[t] = mean;
        series.standard_error[t] = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
      }
      report.series.push_back(std::move(series));
    }
  }

  const double m0 = mass(u0);
  const double hs_h_sq = noise ? noise->hs_norm_sq(NoiseSpace::H) : 0.0;
  if (params.lambda > 0.0) {
    if (const MomentSeries* ms = report.find("mass", 1)) {
      for (std::size_t t = 0; t < nt; ++t) {
        const double exact = exact_mean_mass(report.times[t], m0, params.lambda, hs_h_sq);
        report.exact_mean_mass.push_back(exact);
        const double dev = std::abs(ms->mean[t] - exact);
        report.max_mass_deviation = std::max(report.max_mass_deviation, dev);
        if (exact > 0.0)
          report.max_mass_relative_deviation = std::max(report.max_mass_relative_deviation, dev / exact);
        if (ms->standard_error[t] > 0.0)
          report.max_mass_deviation_in_se =
              std::max(report.max_mass_deviation_in_se, dev / ms->standard_error[t]);
      }
    }
  }

  if (!noise || params.lambda <= 0.0) return report;

  const double lambda = params.lambda;
  const double sigma = params.sigma;
  const double hs_h = noise->hs_norm(NoiseSpace::H);
  const double hs_v = noise->hs_norm(NoiseSpace::V);
  const double h0 = energy(u0, sigma, params.alpha);
  auto transient_series = [&](double rate, double amplitude) {
    std::vector<double> out(nt);
    for (std::size_t t = 0; t < nt; ++t) out[t] = std::exp(-rate * report.times[t]) * amplitude;
    return out;
  };
  auto add_fit = [&](const std::string& name, int m, std::vector<double> transient, double scale,
                     bool multiplicative) {
    const MomentSeries* s = report.find(name, m);
    if (!s) return;
    BoundCheck b = fit_bound(s->mean, transient, scale, multiplicative);
    b.observable = name;
    b.power = m;
    report.bounds.push_back(b);
  };

  for (int m : options.powers) {
    const double lm = std::pow(lambda, -m);
    add_fit("mass", m, transient_series(lambda * m, std::pow(m0, m)), std::pow(hs_h, 2.0 * m) * lm, false);
    if (params.alpha == -1 && d >= 2) {
      const double p1 = phi1(sigma, lambda, hs_v);
      add_fit("energy", m, transient_series(lambda * m, std::pow(h0, m)), std::pow(p1, m) * lm, false);
      add_fit("v_norm_sq", m, transient_series(lambda * m, std::pow(h0, m) + std::pow(m0, m)),
              std::pow(p1 + hs_h * hs_h, m) * lm, true);
    }
    if (focusing_fits && d >= 2) {
      const double e = modified_energy_exponent(sigma, d);
      const double a = std::min(2.0 - 2.0 * sigma, e);
      const double ht0 = modified_energy(u0, sigma, *options.g);
      const double p2 = phi2_m1(d, sigma, lambda, hs_h, noise->hs_norm(NoiseSpace::gradH));
      const double mass_term = (lm + std::pow(lambda, -0.5 * (m - 1))) * std::pow(m0, m * e);
      add_fit("modified_energy", m, transient_series(m * a * lambda, std::pow(ht0, m) + mass_term),
              std::pow(p2, m) * lm, true);
      add_fit("v_norm_sq", m,
              transient_series(m * a * lambda, std::pow(ht0, m) + mass_term + std::pow(m0, m)),
              std::pow(p2 + hs_h * hs_h, m) * lm, true);
    }
  }
  return report;
}

bool mass_identity_holds(const MomentReport& report, double z, double relative) {
  const MomentSeries* ms = report.find("mass", 1);
  if (!ms || report.exact_mean_mass.size() != ms->mean.size() || ms->mean.empty()) return false;
  for (std::size_t t = 0; t < ms->mean.size(); ++t) {
    const double exact = report.exact_mean_mass[t];
    const double allowed = std::max(z * ms->standard_error[t], relative * std::abs(exact));
    if (!(std::abs(ms->mean[t] - exact) <= allowed)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

SyncReport sync_experiment(const Field& x1, const Field& x2, const SimParams& params,
                           const NoiseOperator* noise, RandomStream stream, double tolerance) {
  if (x1.grid().dim() != x2.grid().dim() ||
      x1.grid().points_per_axis() != x2.grid().points_per_axis() ||
      x1.grid().length() != x2.grid().length())
    throw ConfigError("sync_experiment: initial conditions live on different grids");
  const Integrator integrator(x1.grid_ptr(), params, noise);
  State a{x1.physical_copy(), 0.0, stream};
  State b{x2.physical_copy(), 0.0, stream};

  SyncReport rep;
  rep.tolerance = tolerance;
  const double sigma = params.sigma;
  const double lambda = params.lambda;
  auto w_sq = [&] { return mass(a.field - b.field); };

  double l1 = linf_power(a.field, sigma);
  double l2 = linf_power(b.field, sigma);
  double integral1 = 0.0, integral2 = 0.0;
  const double w0 = w_sq();
  auto log_row = [&](double t) {
    const double w = w_sq();
    const double integral = integral1 + integral2;
    const double r = t > 0.0 ? integral / t : l1 + l2;
    const double env = w0 * std::exp(-2.0 * lambda * t + 2.0 * integral);
    rep.times.push_back(t);
    rep.w_sq.push_back(w);
    rep.r.push_back(r);
    rep.envelope.push_back(env);
    rep.margin.push_back(lambda - r);
    if (w > env * (1.0 + tolerance)) ++rep.violations;
  };
  log_row(0.0);

  const std::size_t steps = params.step_count();
  for (std::size_t i = 1; i <= steps; ++i) {
    integrator.step_pair(a, b, stream);
    const double n1 = linf_power(a.field, sigma);
    const double n2 = linf_power(b.field, sigma);
    integral1 += 0.5 * (l1 + n1) * params.dt;
    integral2 += 0.5 * (l2 + n2) * params.dt;
    l1 = n1;
    l2 = n2;
    if (i % static_cast<std::size_t>(params.log_every) == 0 || i == steps) log_row(a.t);
  }
  rep.envelope_holds = rep.violations == 0;

  const double horizon = a.t;
  if (horizon > 0.0) {
    rep.time_average_linf[0] = integral1 / horizon;
    rep.time_average_linf[1] = integral2 / horizon;
  }
  for (int k = 0; k < 2; ++k) rep.trajectory_margin[k] = lambda - 2.0 * rep.time_average_linf[k];

  rep.min_margin = kInfinity;
  for (std::size_t t = 0; t < rep.times.size(); ++t)
    if (rep.times[t] > 0.0) rep.min_margin = std::min(rep.min_margin, rep.margin[t]);

  // least-squares slope of log ||w||^2 against t
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < rep.times.size(); ++t) {
    if (!(rep.w_sq[t] > 0.0)) continue;
    const double y = std::log(rep.w_sq[t]);
    st += rep.times[t];
    sy += y;
    stt += rep.times[t] * rep.times[t];
    sty += rep.times[t] * y;
    ++n;
  }
  if (n >= 2) {
    const double dn = static_cast<double>(n);
    rep.decay_rate = -(dn * sty - st * sy) / (dn * stt - st * st);
  } else {
    rep.decay_rate = std::nan("");
  }
  return rep;
}

SyncSummary summarize_sync(std::span<const SyncReport> reports, double margin_threshold,
                           double rate_slack) {
  SyncSummary out;
  out.pairs = reports.size();
  if (reports.empty()) return out;
  out.min_trajectory_margin = kInfinity;
  out.min_decay_rate = kInfinity;
  for (const auto& r : reports) {
    out.violations += r.violations;
    out.min_trajectory_margin =
        std::min({out.min_trajectory_margin, r.trajectory_margin[0], r.trajectory_margin[1]});
    out.min_decay_rate = std::min(out.min_decay_rate, r.decay_rate);
  }
  out.large_damping = out.min_trajectory_margin >= margin_threshold;
  out.rate_ok = out.min_decay_rate >= (1.0 - rate_slack) * 2.0 * out.min_trajectory_margin;
  return out;
}

// ---------------------------------------------------------------------------

double default_burn_in(double lambda, double horizon) {
  const double by_rate = lambda > 0.0 ? 10.0 / lambda : 0.0;
  return std::max(by_rate, horizon / 10.0);
}

BirkhoffReport time_average(std::span<const double> times, std::span<const double> values,
                            double burn_in, std::size_t batches) {
  if (times.size() != values.size()) throw DomainError("time_average: length mismatch");
  if (times.empty() || !(times.back() > burn_in))
    throw ConfigError("birkhoff: horizon T must exceed the burn-in");
  if (batches < 2) throw ConfigError("birkhoff: need at least 2 batches");
  std::size_t first = 0;
  while (first < times.size() && times[first] < burn_in) ++first;
  const std::size_t intervals = times.size() - 1 - first;
  if (first >= times.size() || intervals < batches)
    throw ConfigError("birkhoff: too few logged samples after burn-in for the batch count");

  BirkhoffReport rep;
  rep.burn_in = burn_in;
  rep.batches = batches;
  std::vector<double> batch_integral(batches, 0.0), batch_duration(batches, 0.0);
  double integral = 0.0, duration = 0.0;
  rep.times.push_back(times[first]);
  rep.running_average.push_back(values[first]);
  for (std::size_t i = 0; i < intervals; ++i) {
    const std::size_t k = first + i;
    const double dt = times[k + 1] - times[k];
    const double piece = 0.5 * (values[k] + values[k + 1]) * dt;
    integral += piece;
    duration += dt;
    const std::size_t b = i * batches / intervals;
    batch_integral[b] += piece;
    batch_duration[b] += dt;
    rep.times.push_back(times[k + 1]);
    rep.running_average.push_back(integral / duration);
  }
  rep.average = integral / duration;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const double x = batch_integral[b] / batch_duration[b];
    const double delta = x - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (x - mean);
  }
  rep.standard_error = std::sqrt(m2 / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return rep;
}

std::vector<BirkhoffReport> birkhoff_averages(const Field& x0, const SimParams& params,
                                              const NoiseOperator* noise,
                                              std::span<const Observable> observables,
                                              RandomStream stream, const BirkhoffOptions& options) {
  params.validate();
  const double burn_in = options.burn_in.value_or(default_burn_in(params.lambda, params.t_final));
  if (!(params.t_final > burn_in)) throw ConfigError("birkhoff: horizon T must exceed the burn-in");
  State s{x0.physical_copy(), 0.0, stream};
  const EvolveResult run = evolve(std::move(s), params, noise, observables);
  std::vector<BirkhoffReport> out;
  for (std::size_t j = 0; j < observables.size(); ++j) {
    BirkhoffReport rep = time_average(run.log.times, run.log.column(j), burn_in, options.batches);
    rep.observable = observables[j].name;
    if (rep.observable == "linf_pow") rep.uniqueness_margin = params.lambda - 2.0 * rep.average;
    out.push_back(std::move(rep));
  }
  return out;
}

BirkhoffReport birkhoff_average(const Field& x0, const SimParams& params, const NoiseOperator* noise,
                                const Observable& observable, RandomStream stream,
                                const BirkhoffOptions& options) {
  return birkhoff_averages(x0, params, noise, std::span(&observable, 1), stream, options).front();
}

// ---------------------------------------------------------------------------

bool ci_nonincreasing(std::span<const Estimate> estimates, double z) {
  for (std::size_t i = 0; i + 1 < estimates.size(); ++i) {
    const double combined = std::hypot(estimates[i].standard_error, estimates[i + 1].standard_error);
    if (estimates[i + 1].value > estimates[i].value + z * combined) return false;
  }
  return true;
}

SweepReport lambda_sweep(const Field& x0, const SimParams& params, const NoiseOperator& noise,
                         std::span<const double> lambdas, const SweepOptions& options) {
  if (lambdas.empty()) throw ConfigError("experiment.lambdas: empty list");
  if (options.paths < 1) throw ConfigError("experiment.paths: need at least one path");
  std::vector<double> sorted(lambdas.begin(), lambdas.end());
  std::sort(sorted.begin(), sorted.end());
  for (double l : sorted)
    if (!(l > 0.0)) throw ConfigError("experiment.lambdas: every lambda must be > 0");

  const std::vector<Observable> observers{named_observable("v_norm_sq", params.sigma, params.alpha),
                                          named_observable("linf_pow", params.sigma, params.alpha),
                                          named_observable("mass", params.sigma, params.alpha)};
  const std::size_t jobs = sorted.size() * options.paths;
  std::vector<std::vector<BirkhoffReport>> results(jobs);
  parallel_for(jobs, options.workers, [&](std::size_t job) {
    SimParams p = params;
    p.lambda = sorted[job / options.paths];
    const RandomStream stream = RandomStream::derive(params.seed, StreamRole::birkhoff, job);
    results[job] = birkhoff_averages(x0, p, &noise, observers, stream, {options.burn_in, options.batches});
  });

  SweepReport report;
  const double hs_h_sq = noise.hs_norm_sq(NoiseSpace::H);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    SweepRow row;
    row.lambda = sorted[i];
    Estimate* targets[3] = {&row.v_norm_sq, &row.linf_pow, &row.mass};
    for (std::size_t j = 0; j < 3; ++j) {
      double sum = 0.0, var = 0.0;
      for (std::size_t p = 0; p < options.paths; ++p) {
        const auto& r = results[i * options.paths + p][j];
        sum += r.average;
        var += r.standard_error * r.standard_error;
      }
      const double np = static_cast<double>(options.paths);
      *targets[j] = {sum / np, std::sqrt(var) / np};
    }
    row.mass_target = hs_h_sq / (2.0 * row.lambda);
    row.mass_matches = std::abs(row.mass.value - row.mass_target) <= 3.0 * row.mass.standard_error;
    report.mass_matches = report.mass_matches && row.mass_matches;
    report.rows.push_back(row);
  }
  if (report.rows.size() >= 2) {
    std::vector<Estimate> v, l;
    for (const auto& r : report.rows) {
      v.push_back(r.v_norm_sq);
      l.push_back(r.linf_pow);
    }
    report.v_norm_nonincreasing = ci_nonincreasing(v, options.z);
    report.linf_nonincreasing = ci_nonincreasing(l, options.z);
  }
  return report;
}

}  // namespace snls
