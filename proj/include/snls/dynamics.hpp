#pragma once

// Split-step integrator for
//     du + [i Lap u + i alpha |u|^{2 sigma} u + lambda u] dt = Phi dW.
// Each step applies the exact pointwise phase flow of the nonlinearity, the
// exact linear-plus-damping flow per Fourier mode, and then one additive noise
// increment (noise always enters after the deterministic substeps).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snls/grid.hpp"
#include "snls/noise.hpp"
#include "snls/rng.hpp"

namespace snls {

enum class Scheme { lie, strang };

struct SimParams {
  double lambda = 1.0;  ///< damping rate, >= 0 (0 only for conservation runs)
  double sigma = 1.0;   ///< nonlinearity power, > 0
  int alpha = -1;       ///< +1 focusing, -1 defocusing
  double dt = 1e-3;
  double t_final = 1.0;
  Scheme scheme = Scheme::lie;
  int log_every = 10;
  std::uint64_t seed = 0;
  bool dealias = false;      ///< 2x zero-padded nonlinear substep; integer sigma only
  bool nonlinearity = true;  ///< test hook: false drops the nonlinear substep

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Number of steps needed to reach t_final from 0.
  std::size_t step_count() const;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct State {
  Field field;  ///< physical representation between steps
  double t = 0.0;
  RandomStream rng;
};

/// A row of observables recorded at the logging instants.
struct Observable {
  std::string name;
  std::function<double(const Field&)> evaluate;
};

struct TrajectoryLog {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;  ///< rows[i][j]: observable j at times[i]

  std::vector<double> column(std::size_t j) const;
};

/// Non-finite sample or modulus above the blow-up threshold after a step.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double t, double last_mass, double last_linf);

  double time() const { return t_; }
  double last_good_mass() const { return last_mass_; }
  double last_good_linf() const { return last_linf_; }

  /// Observables logged before the failure; filled in by evolve().
  TrajectoryLog partial_log;

 private:
  double t_;
  double last_mass_;
  double last_linf_;
};

inline constexpr double kBlowUpModulus = 1e12;

/// Per-mode multiplier exp((i|k|^2 - lambda) dt).
Field linear_step(Field u, double dt, double lambda);

/// Pointwise u * exp(-i alpha |u|^{2 sigma} dt); returns physical representation.
Field nonlinear_step(Field u, double dt, double sigma, int alpha);

/// Precomputed per-step multipliers for a fixed (grid, params, noise).
/// Stateless apart from the tables; one instance may be shared by workers.
class Integrator {
 public:
  /// noise may be null (Phi = 0).
  Integrator(GridPtr grid, const SimParams& params, const NoiseOperator* noise);

  const SimParams& params() const { return params_; }

  /// One full step: deterministic substeps, noise from state.rng, blow-up check.
  void step(State& state) const;

  /// Steps two states with one shared noise increment drawn from `stream`.
  void step_pair(State& a, State& b, RandomStream& stream) const;

 private:
  void deterministic(Field& u) const;
  void nonlinear_inplace(Field& u, double dt) const;
  void nonlinear_padded(Field& u, double dt) const;
  void check_finite(const State& s, double mass_before, double linf_before) const;

  GridPtr grid_;
  GridPtr padded_grid_;
  SimParams params_;
  const NoiseOperator* noise_;
  std::vector<Complex> linear_multiplier_;
};

/// Advances a copy of the state by one step (builds a one-off Integrator).
State step(State state, const SimParams& params, const NoiseOperator* noise);

struct EvolveResult {
  TrajectoryLog log;
  State final_state;
};

/// Steps from initial.t for params.step_count() steps, logging observables at
/// the start, every log_every steps and at the end. Logging never touches the
/// state. Blow-up rethrows BlowUpError with partial_log attached.
EvolveResult evolve(State initial, const SimParams& params, const NoiseOperator* noise,
                    std::span<const Observable> observers);

/// Same as evolve() but for an explicit number of steps.
EvolveResult evolve_steps(State initial, std::size_t steps, const SimParams& params,
                          const NoiseOperator* noise, std::span<const Observable> observers);

}  // namespace snls
