#include "snls/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "snls/errors.hpp"

namespace snls {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::shared_ptr<const Grid> Grid::make(int d, int n, double length) {
  if (d < 1 || d > 3) throw ConfigError("grid: dimension must be 1, 2 or 3, got " + std::to_string(d));
  if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw ConfigError("grid: points per axis must be a power of two >= 8, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length))
    throw ConfigError("grid: box length must be positive and finite");
  return std::shared_ptr<const Grid>(new Grid(d, n, length));
}

Grid::Grid(int d, int n, double length) : d_(d), n_(n), length_(length) {
  size_ = 1;
  for (int a = 0; a < d; ++a) size_ *= static_cast<std::size_t>(n);
  volume_ = std::pow(length, d);
  cell_volume_ = std::pow(length / n, d);

  axis_k_.resize(n);
  for (int j = 0; j < n; ++j) {
    const int m = j <= n / 2 ? j : j - n;
    axis_k_[j] = 2.0 * std::numbers::pi * m / length;
  }
  k_squared_.resize(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const auto idx = unflatten(i);
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += axis_k_[idx[a]] * axis_k_[idx[a]];
    k_squared_[i] = k2;
  }
  max_k_squared_ = *std::max_element(k_squared_.begin(), k_squared_.end());

  std::array<int, 3> dims{n, n, n};
  std::vector<Complex> scratch(size_);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft(d, dims.data(), as_fftw(scratch.data()), as_fftw(scratch.data()),
                                FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft(d, dims.data(), as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_BACKWARD, flags);
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = d_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

bool Grid::is_valid_mode(std::span<const int> mode) const {
  if (static_cast<int>(mode.size()) != d_) return false;
  return std::all_of(mode.begin(), mode.end(),
                     [this](int m) { return m >= -n_ / 2 && m <= n_ / 2; });
}

std::size_t Grid::mode_index(std::span<const int> mode) const {
  if (!is_valid_mode(mode)) throw ConfigError("grid: mode outside the grid's spectral range");
  std::size_t flat = 0;
  for (int a = 0; a < d_; ++a) flat = flat * n_ + static_cast<std::size_t>(((mode[a] % n_) + n_) % n_);
  return flat;
}

void Grid::forward_dft(Complex* data) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data), as_fftw(data));
}

void Grid::backward_dft(Complex* data) const {
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data), as_fftw(data));
}

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, Representation rep)
    : grid_(std::move(grid)), values_(grid_->size()), rep_(rep) {}

Field::Field(GridPtr grid, std::vector<Complex> values, Representation rep)
    : grid_(std::move(grid)), values_(std::move(values)), rep_(rep) {
  if (values_.size() != grid_->size()) throw ConfigError("field: sample count does not match grid");
}

void Field::to_spectral() {
  if (rep_ == Representation::spectral) return;
  grid_->forward_dft(values_.data());
  const double scale = std::sqrt(grid_->volume()) / static_cast<double>(grid_->size());
  for (auto& v : values_) v *= scale;
  rep_ = Representation::spectral;
}

void Field::to_physical() {
  if (rep_ == Representation::physical) return;
  grid_->backward_dft(values_.data());
  const double scale = 1.0 / std::sqrt(grid_->volume());
  for (auto& v : values_) v *= scale;
  rep_ = Representation::physical;
}

Field Field::spectral_copy() const {
  Field c = *this;
  c.to_spectral();
  return c;
}

Field Field::physical_copy() const {
  Field c = *this;
  c.to_physical();
  return c;
}

Field& Field::operator+=(const Field& other) {
  if (other.grid_->size() != grid_->size() || other.grid_->dim() != grid_->dim())
    throw ConfigError("field: grid mismatch");
  if (other.rep_ == rep_) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  } else {
    Field o = other;
    rep_ == Representation::physical ? o.to_physical() : o.to_spectral();
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  }
  return *this;
}

Field& Field::operator-=(const Field& other) {
  Field neg = other;
  neg *= -1.0;
  return *this += neg;
}

Field& Field::operator*=(Complex factor) {
  for (auto& v : values_) v *= factor;
  return *this;
}

Field operator-(Field a, const Field& b) {
  a -= b;
  return a;
}

// ---------------------------------------------------------------------------

double lp_integral(const Field& u, double q) {
  const Field phys = u.is_physical() ? u : u.physical_copy();
  double sum = 0.0;
  for (const auto& v : phys.values()) sum += std::pow(std::abs(v), q);
  return sum * u.grid().cell_volume();
}

double lp_norm(const Field& u, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: exponent must be >= 1");
  const Field phys = u.is_physical() ? u : u.physical_copy();
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : phys.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 2.0) {
    double sum = 0.0;
    for (const auto& v : phys.values()) sum += std::norm(v);
    return std::sqrt(sum * u.grid().cell_volume());
  }
  return std::pow(lp_integral(phys, p), 1.0 / p);
}

double sobolev_norm(const Field& u, double s, double p) {
  if (!(s >= 0.0)) throw DomainError("sobolev_norm: smoothness order must be >= 0");
  if (!(p >= 1.0)) throw DomainError("sobolev_norm: exponent must be >= 1");
  if (s == 0.0) return lp_norm(u, p);
  const Field weighted = apply_multiplier(u, [s](double k2) { return std::pow(1.0 + k2, 0.5 * s); });
  return lp_norm(weighted, p);
}

double gradient_norm_sq(const Field& u) {
  const Field spec = u.is_physical() ? u.spectral_copy() : u;
  const auto k2 = u.grid().k_squared();
  const auto v = spec.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += k2[i] * std::norm(v[i]);
  return sum;
}

double spectral_l2_sq(const Field& u) {
  const Field spec = u.is_physical() ? u.spectral_copy() : u;
  double sum = 0.0;
  for (const auto& v : spec.values()) sum += std::norm(v);
  return sum;
}

}  // namespace snls
