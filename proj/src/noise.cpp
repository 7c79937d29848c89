#include "snls/noise.hpp"

#include <cmath>
#include <set>

#include "snls/errors.hpp"

namespace snls {

NoiseOperator build_noise(GridPtr grid, std::vector<NoiseEntry> entries,
                          NoiseConvention convention) {
  if (entries.empty()) throw ConfigError("noise: entry list is empty");
  NoiseOperator op;
  op.grid_ = std::move(grid);
  op.convention_ = convention;
  std::set<std::size_t> seen;
  const auto k2 = op.grid_->k_squared();
  for (const auto& e : entries) {
    if (!op.grid_->is_valid_mode(e.mode)) throw ConfigError("noise: invalid mode for this grid");
    const std::size_t idx = op.grid_->mode_index(e.mode);
    if (!seen.insert(idx).second) throw ConfigError("noise: duplicate mode");
    if (!std::isfinite(e.amplitude.real()) || !std::isfinite(e.amplitude.imag()))
      throw ConfigError("noise: non-finite amplitude");
    op.indices_.push_back(idx);
    op.h_sq_ += std::norm(e.amplitude);
    op.grad_sq_ += std::norm(e.amplitude) * k2[idx];
  }
  op.v_sq_ = op.h_sq_ + op.grad_sq_;
  op.entries_ = std::move(entries);
  return op;
}

double NoiseOperator::hs_norm_sq(NoiseSpace space) const {
  switch (space) {
    case NoiseSpace::H: return h_sq_;
    case NoiseSpace::V: return v_sq_;
    case NoiseSpace::gradH: return grad_sq_;
  }
  return 0.0;
}

double NoiseOperator::hs_norm(NoiseSpace space) const { return std::sqrt(hs_norm_sq(space)); }

void NoiseOperator::add_increment(Field& spectral, double dt, RandomStream& rng) const {
  if (!(dt >= 0.0)) throw DomainError("noise: negative time step");
  if (spectral.is_physical()) throw ConfigError("noise: increment target must be spectral");
  auto v = spectral.values();
  if (convention_ == NoiseConvention::two_per_mode) {
    const double scale = std::sqrt(0.5 * dt);
    for (std::size_t j = 0; j < entries_.size(); ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      v[indices_[j]] += entries_[j].amplitude * Complex(re * scale, im * scale);
    }
  } else {
    const double scale = std::sqrt(dt);
    for (std::size_t j = 0; j < entries_.size(); ++j) {
      v[indices_[j]] += entries_[j].amplitude * (rng.normal() * scale);
    }
  }
}

NoiseOperator NoiseOperator::rotated(double theta) const {
  NoiseOperator out = *this;
  const Complex phase = std::polar(1.0, theta);
  for (auto& e : out.entries_) e.amplitude *= phase;
  return out;
}

Field sample_increment(const NoiseOperator& noise, double dt, RandomStream& rng) {
  Field out(noise.grid_ptr(), Representation::spectral);
  noise.add_increment(out, dt, rng);
  return out;
}

}  // namespace snls
