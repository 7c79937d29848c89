#pragma once

// Exponent algebra: exact rationals (with infinity), the parameter gate,
// Strichartz admissibility and the exponents of the nonlinearity estimates.

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

/// Normalized fraction num/den with den > 0.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// An exponent in [1, inf] stored exactly; infinity is a distinguished value.
class Exponent {
 public:
  static Exponent infinity();
  Exponent(Rational r);  // NOLINT: exponents are rationals by default
  Exponent(std::int64_t n) : Exponent(Rational(n)) {}

  /// Parses "6", "4/3", "inf"; throws DomainError on anything else.
  static Exponent parse(std::string_view text);

  bool is_infinite() const { return infinite_; }
  Rational finite() const;  ///< throws DomainError for infinity
  /// 1/p, with 1/inf = 0.
  Rational reciprocal() const;
  double value() const;
  std::string str() const;

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  Exponent() = default;
  bool infinite_ = false;
  Rational value_;
};

/// gamma' with 1/gamma + 1/gamma' = 1; 1' = inf and inf' = 1.
Exponent conjugate(const Exponent& gamma);

enum class GateOutcome { admissible, rejected, admissible_with_flag };

struct AssumptionVerdict {
  GateOutcome outcome;
  std::string reason;  ///< empty when plainly admissible

  bool permitted() const { return outcome != GateOutcome::rejected; }
  std::string label() const;
};

/// Parameter gate: focusing needs sigma < 2/d, defocusing sigma < 2/(d-2)
/// for d = 3; d = 3 with sigma >= (1+sqrt 17)/4 is flagged as outside the
/// L^inf-regularity regime. Throws DomainError for d outside {1,2,3}.
AssumptionVerdict check_assumptions(int d, double sigma, int alpha);

/// 2/p + d/r = d/2 exactly, (p,r) != (2,inf), and r in the dimension's range.
bool is_admissible_pair(int d, const Exponent& p, const Exponent& r);

/// Integrability exponent p of the H^{1,p} nonlinearity estimate.
/// d = 2: 2/(2 sigma + 1) below sigma = 1/2 and 4/3 from there on;
/// d = 3: 6/(2 sigma + 3) for sigma in (0, 3/2]. DomainError otherwise.
Rational lemma_c_exponent(int d, Rational sigma);

struct NonlinearityVariant {
  std::string label;     ///< e.g. "H^{1,4/3}"
  double smoothness;     ///< s of the H^{s,p} norm on F(u)
  Rational integrability;
  double corpus_max = 0.0;    ///< largest quotient on the fit corpus
  double fit_max = 0.0;       ///< corpus_max raised by the hill climb; the fitted constant
  double holdout_max = 0.0;   ///< largest quotient on the hold-out corpus
  std::size_t violations = 0; ///< hold-out quotients above fit_max * (1 + slack)
  std::size_t skipped = 0;    ///< zero fields (quotient undefined)
};

struct NonlinearityReport {
  int d = 0;
  Rational sigma;
  double slack = 0.01;
  std::size_t corpus_size = 0;
  std::vector<NonlinearityVariant> variants;

  bool passed() const;
};

struct NonlinearityOptions {
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double slack = 0.01;
  double kappa_smooth = 1.0;
  double kappa_rough = 2.0;
  /// Hill climb from the best fit fields: random smooth perturbations with the
  /// start's spectral width, kept when they raise the quotient.
  std::size_t refine_starts = 8;
  std::size_t refine_steps = 200;
  double refine_step = 0.3;  ///< initial perturbation size relative to the field
};

/// ||F(u)||_{H^{s,p}} / ||u||_V^{2 sigma + 1} with F(u) = |u|^{2 sigma} u.
double nonlinearity_quotient(const Field& u, double sigma, double s, double p);

/// Fit/hold-out check of ||F(u)||_{H^{1,p}} <= C ||u||_V^{2 sigma+1} with p from
/// lemma_c_exponent, plus the H^{2-sigma, 6/5} variant for d = 3, sigma in [1, 3/2].
/// C estimates the supremum: the fit corpus maximum refined by a hill climb.
/// (A raw maximum would lose to an equally sized hold-out half the time.)
NonlinearityReport verify_nonlinearity_estimate(const GridPtr& grid, Rational sigma,
                                                std::size_t corpus_size,
                                                const NonlinearityOptions& options = {});

}  // namespace snls
