#include "snls/dynamics.hpp"

#include <cmath>
#include <string>

#include "snls/errors.hpp"

namespace snls {
namespace {

double mass_of(const Field& u) {
  double sum = 0.0;
  for (const auto& v : u.values()) sum += std::norm(v);
  return sum * u.grid().cell_volume();
}

double linf_of(const Field& u) {
  double m = 0.0;
  for (const auto& v : u.values()) m = std::max(m, std::norm(v));
  return std::sqrt(m);
}

// Plain product; std::complex's operator* takes a slow NaN-recovery path.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

void rotate_phases(std::span<Complex> values, double dt, double sigma, int alpha) {
  const double rate = -static_cast<double>(alpha) * dt;
  const bool cubic = sigma == 1.0;
  for (auto& v : values) {
    const double r2 = std::norm(v);
    if (r2 == 0.0) continue;
    const double phase = rate * (cubic ? r2 : std::pow(r2, sigma));
    v = mul(v, Complex(std::cos(phase), std::sin(phase)));
  }
}

}  // namespace

void SimParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("params.lambda: must be >= 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("params.sigma: must be > 0");
  if (alpha != 1 && alpha != -1) throw ConfigError("params.alpha: must be +1 or -1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("params.dt: must be > 0");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("params.t_final: must be >= 0");
  if (log_every < 1) throw ConfigError("params.log_every: must be >= 1");
  if (dealias && sigma != std::floor(sigma))
    throw ConfigError("params.dealias: zero-padding requires an integer sigma");
  const double ratio = t_final / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio))
    throw ConfigError("params.t_final: must be an integer multiple of params.dt");
}

std::size_t SimParams::step_count() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

std::vector<double> TrajectoryLog::column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(j));
  return out;
}

BlowUpError::BlowUpError(double t, double last_mass, double last_linf)
    : std::runtime_error("blow-up detected at t = " + std::to_string(t) +
                         " (last good mass " + std::to_string(last_mass) + ", L^inf " +
                         std::to_string(last_linf) + ")"),
      t_(t),
      last_mass_(last_mass),
      last_linf_(last_linf) {}

Field linear_step(Field u, double dt, double lambda) {
  u.to_spectral();
  const auto k2 = u.grid().k_squared();
  auto v = u.values();
  const double decay = std::exp(-lambda * dt);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(decay, k2[i] * dt);
  return u;
}

Field nonlinear_step(Field u, double dt, double sigma, int alpha) {
  u.to_physical();
  if (dt != 0.0) rotate_phases(u.values(), dt, sigma, alpha);
  return u;
}

// ---------------------------------------------------------------------------

Integrator::Integrator(GridPtr grid, const SimParams& params, const NoiseOperator* noise)
    : grid_(std::move(grid)), params_(params), noise_(noise) {
  params_.validate();
  if (noise_ && noise_->grid().size() != grid_->size())
    throw ConfigError("integrator: noise operator lives on a different grid");
  const auto k2 = grid_->k_squared();
  const double decay = std::exp(-params_.lambda * params_.dt);
  linear_multiplier_.resize(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i)
    linear_multiplier_[i] = std::polar(decay, k2[i] * params_.dt);
  if (params_.dealias)
    padded_grid_ = Grid::make(grid_->dim(), 2 * grid_->points_per_axis(), grid_->length());
}

void Integrator::nonlinear_inplace(Field& u, double dt) const {
  if (!params_.nonlinearity) return;
  if (params_.dealias) {
    nonlinear_padded(u, dt);
    return;
  }
  rotate_phases(u.values(), dt, params_.sigma, params_.alpha);
}

void Integrator::nonlinear_padded(Field& u, double dt) const {
  const int n = grid_->points_per_axis();
  const int n2 = 2 * n;
  const int d = grid_->dim();
  u.to_spectral();
  Field big(padded_grid_, Representation::spectral);
  std::vector<std::size_t> map(grid_->size());
  std::array<int, 3> mode{};
  for (std::size_t i = 0; i < grid_->size(); ++i) {
    const auto idx = grid_->unflatten(i);
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      mode[a] = idx[a] <= n / 2 ? idx[a] : idx[a] - n;
      flat = flat * n2 + static_cast<std::size_t>((mode[a] + n2) % n2);
    }
    map[i] = flat;
    big.values()[flat] = u.values()[i];
  }
  big.to_physical();
  rotate_phases(big.values(), dt, params_.sigma, params_.alpha);
  big.to_spectral();
  for (std::size_t i = 0; i < grid_->size(); ++i) u.values()[i] = big.values()[map[i]];
  u.to_physical();
}

void Integrator::deterministic(Field& u) const {
  const double dt = params_.dt;
  if (params_.scheme == Scheme::lie) {
    nonlinear_inplace(u, dt);
    u.to_spectral();
    auto v = u.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mul(v[i], linear_multiplier_[i]);
  } else {
    nonlinear_inplace(u, 0.5 * dt);
    u.to_spectral();
    auto v = u.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mul(v[i], linear_multiplier_[i]);
    u.to_physical();
    nonlinear_inplace(u, 0.5 * dt);
  }
}

void Integrator::check_finite(const State& s, double mass_before, double linf_before) const {
  for (const auto& v : s.field.values()) {
    const double r2 = std::norm(v);
    if (!std::isfinite(r2) || r2 > kBlowUpModulus * kBlowUpModulus)
      throw BlowUpError(s.t, mass_before, linf_before);
  }
}

void Integrator::step(State& s) const {
  const double mass_before = mass_of(s.field);
  const double linf_before = linf_of(s.field);
  Field& u = s.field;
  u.to_physical();
  deterministic(u);
  if (noise_) {
    if (u.is_physical()) {
      Field inc = sample_increment(*noise_, params_.dt, s.rng);
      inc.to_physical();
      u += inc;
    } else {
      noise_->add_increment(u, params_.dt, s.rng);
    }
  }
  u.to_physical();
  s.t += params_.dt;
  check_finite(s, mass_before, linf_before);
}

void Integrator::step_pair(State& a, State& b, RandomStream& stream) const {
  const double mass_a = mass_of(a.field), linf_a = linf_of(a.field);
  const double mass_b = mass_of(b.field), linf_b = linf_of(b.field);
  a.field.to_physical();
  b.field.to_physical();
  deterministic(a.field);
  deterministic(b.field);
  if (noise_) {
    Field inc = sample_increment(*noise_, params_.dt, stream);
    if (a.field.is_physical()) inc.to_physical();
    a.field += inc;
    b.field += inc;
  }
  a.field.to_physical();
  b.field.to_physical();
  a.t += params_.dt;
  b.t += params_.dt;
  check_finite(a, mass_a, linf_a);
  check_finite(b, mass_b, linf_b);
}

State step(State state, const SimParams& params, const NoiseOperator* noise) {
  const Integrator integrator(state.field.grid_ptr(), params, noise);
  integrator.step(state);
  return state;
}

// ---------------------------------------------------------------------------

namespace {

void record(TrajectoryLog& log, const State& s, std::span<const Observable> observers) {
  log.times.push_back(s.t);
  std::vector<double> row;
  row.reserve(observers.size());
  for (const auto& o : observers) row.push_back(o.evaluate(s.field));
  log.rows.push_back(std::move(row));
}

}  // namespace

EvolveResult evolve_steps(State initial, std::size_t steps, const SimParams& params,
                          const NoiseOperator* noise, std::span<const Observable> observers) {
  const Integrator integrator(initial.field.grid_ptr(), params, noise);
  EvolveResult result{TrajectoryLog{}, std::move(initial)};
  for (const auto& o : observers) result.log.names.push_back(o.name);
  State& s = result.final_state;
  s.field.to_physical();
  record(result.log, s, observers);
  for (std::size_t i = 1; i <= steps; ++i) {
    try {
      integrator.step(s);
    } catch (BlowUpError& e) {
      e.partial_log = result.log;
      throw;
    }
    if (i % static_cast<std::size_t>(params.log_every) == 0 || i == steps)
      record(result.log, s, observers);
  }
  return result;
}

EvolveResult evolve(State initial, const SimParams& params, const NoiseOperator* noise,
                    std::span<const Observable> observers) {
  params.validate();
  return evolve_steps(std::move(initial), params.step_count(), params, noise, observers);
}

}  // namespace snls
