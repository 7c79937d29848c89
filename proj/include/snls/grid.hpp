#pragma once

// Periodic-box discretization and spectral transforms.
//
// Normalization (used by every norm in the library): with N = n^d samples
// u_j on the box [-L/2, L/2)^d and cell volume h^d = Vol/N, the spectral
// coefficients are
//
//     c_k = (h^d / sqrt(Vol)) * sum_j u_j exp(-i k . (x_j - x_0)),
//
// i.e. the plain DFT scaled by sqrt(Vol)/N, and the inverse is
// u_j = Vol^{-1/2} sum_k c_k exp(i k . (x_j - x_0)). The pair is unitary
// between the quadrature L^2 inner product (h^d sum_j) and the plain l^2 sum
// over modes, so ||u||_{L^2}^2 = sum_k |c_k|^2 and ||grad u||^2 = sum_k |k|^2 |c_k|^2.
// Phases are measured from the box corner x_0 = (-L/2, ..., -L/2).

#include <array>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace snls {

using Complex = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class Grid {
 public:
  /// Throws ConfigError unless d in {1,2,3}, n a power of two >= 8, L > 0.
  static std::shared_ptr<const Grid> make(int d, int n, double length);

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int dim() const { return d_; }
  int points_per_axis() const { return n_; }
  double length() const { return length_; }
  std::size_t size() const { return size_; }
  double spacing() const { return length_ / n_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return volume_; }

  /// Per-axis wavenumbers 2*pi*j/L in FFT order; the Nyquist entry is +pi*n/L.
  std::span<const double> axis_wavenumbers() const { return axis_k_; }
  /// |k|^2 for every flat spectral index (row-major, last axis fastest).
  std::span<const double> k_squared() const { return k_squared_; }
  double max_k_squared() const { return max_k_squared_; }

  /// Physical coordinate of sample j along any axis.
  double coordinate(int j) const { return -0.5 * length_ + j * spacing(); }
  /// Multi-index (unused trailing axes are 0) of a flat index.
  std::array<int, 3> unflatten(std::size_t flat) const;
  /// Flat spectral index of an integer mode (each entry in [-n/2, n/2]).
  std::size_t mode_index(std::span<const int> mode) const;
  bool is_valid_mode(std::span<const int> mode) const;

  /// In-place unnormalized DFTs on n^d contiguous samples. Thread-safe.
  void forward_dft(Complex* data) const;
  void backward_dft(Complex* data) const;

 private:
  Grid(int d, int n, double length);

  int d_;
  int n_;
  double length_;
  std::size_t size_;
  double cell_volume_;
  double volume_;
  std::vector<double> axis_k_;
  std::vector<double> k_squared_;
  double max_k_squared_ = 0.0;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

enum class Representation { physical, spectral };

/// Complex samples of u on a grid, tagged with their current representation.
class Field {
 public:
  explicit Field(GridPtr grid, Representation rep = Representation::physical);
  Field(GridPtr grid, std::vector<Complex> values, Representation rep);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Representation representation() const { return rep_; }
  bool is_physical() const { return rep_ == Representation::physical; }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  void to_spectral();
  void to_physical();
  Field spectral_copy() const;
  Field physical_copy() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(Complex factor);

 private:
  GridPtr grid_;
  std::vector<Complex> values_;
  Representation rep_;
};

Field operator-(Field a, const Field& b);

/// Samples f(x) at every grid point; x has dim() meaningful entries.
template <class F>
Field sample_field(const GridPtr& grid, F&& f) {
  Field out(grid);
  auto v = out.values();
  std::array<double, 3> x{};
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto idx = grid->unflatten(i);
    for (int a = 0; a < grid->dim(); ++a) x[a] = grid->coordinate(idx[a]);
    v[i] = f(std::span<const double>(x.data(), grid->dim()));
  }
  return out;
}

/// Quadrature L^p norm (sum |u|^p h^d)^{1/p}; p = kInfinity gives the max
/// modulus over grid samples. Throws DomainError for p < 1.
double lp_norm(const Field& u, double p);

/// Quadrature integral of |u|^q, without the 1/q root.
double lp_integral(const Field& u, double q);

/// ||A_1^{s/2} u||_{L^p} with multiplier (1+|k|^2)^{s/2}. Throws DomainError for s < 0.
double sobolev_norm(const Field& u, double s, double p);

/// sum_k |k|^2 |c_k|^2.
double gradient_norm_sq(const Field& u);

/// sum_k |c_k|^2, the spectral side of Parseval.
double spectral_l2_sq(const Field& u);

/// Returns the field with every coefficient multiplied by m(|k|^2), physical.
template <class M>
Field apply_multiplier(const Field& u, M&& multiplier) {
  Field s = u.spectral_copy();
  auto v = s.values();
  const auto k2 = u.grid().k_squared();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= multiplier(k2[i]);
  s.to_physical();
  return s;
}

}  // namespace snls
