#include "snls/exponents.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "snls/corpus.hpp"
#include "snls/errors.hpp"
#include "snls/parallel.hpp"

namespace snls {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(Rational a, Rational b) { return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_}; }
Rational operator-(Rational a, Rational b) { return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_}; }
Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
Rational operator/(Rational a, Rational b) {
  if (b.num_ == 0) throw DomainError("rational: division by zero");
  return {a.num_ * b.den_, a.den_ * b.num_};
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return a.num_ * b.den_ <=> b.num_ * a.den_;
}

// ---------------------------------------------------------------------------

Exponent Exponent::infinity() {
  Exponent e;
  e.infinite_ = true;
  return e;
}

Exponent::Exponent(Rational r) : value_(r) {
  if (r < Rational(1)) throw DomainError("exponent must be >= 1, got " + r.str());
}

Exponent Exponent::parse(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "oo") return infinity();
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw DomainError("cannot parse exponent '" + std::string(text) + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Exponent(Rational(parse_int(text)));
  return Exponent(Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))));
}

Rational Exponent::finite() const {
  if (infinite_) throw DomainError("exponent is infinite");
  return value_;
}

Rational Exponent::reciprocal() const { return infinite_ ? Rational(0) : Rational(1) / value_; }

double Exponent::value() const { return infinite_ ? kInfinity : value_.value(); }

std::string Exponent::str() const { return infinite_ ? "inf" : value_.str(); }

Exponent conjugate(const Exponent& gamma) {
  const Rational inv = Rational(1) - gamma.reciprocal();
  if (inv == Rational(0)) return Exponent::infinity();
  return Exponent(Rational(1) / inv);
}

// ---------------------------------------------------------------------------

std::string AssumptionVerdict::label() const {
  switch (outcome) {
    case GateOutcome::admissible: return "admissible";
    case GateOutcome::rejected: return "rejected";
    case GateOutcome::admissible_with_flag: return "admissible-with-flag";
  }
  return "";
}

AssumptionVerdict check_assumptions(int d, double sigma, int alpha) {
  if (d < 1 || d > 3) throw DomainError("parameter gate: only d = 1, 2, 3 are covered");
  if (alpha != 1 && alpha != -1) throw DomainError("parameter gate: alpha must be +1 or -1");
  if (!(sigma >= 0.0)) return {GateOutcome::rejected, "sigma must be >= 0"};
  if (alpha == 1) {
    if (!(sigma * d < 2.0))
      return {GateOutcome::rejected, "focusing requires sigma < 2/d = " + std::to_string(2.0 / d)};
  } else if (d == 3 && !(sigma < 2.0)) {
    return {GateOutcome::rejected, "defocusing in d = 3 requires sigma < 2/(d-2) = 2"};
  }
  const double regularity_limit = (1.0 + std::sqrt(17.0)) / 4.0;
  if (d == 3 && sigma >= regularity_limit)
    return {GateOutcome::admissible_with_flag,
            "outside L^inf-regularity regime: sigma >= (1+sqrt(17))/4 = " +
                std::to_string(regularity_limit) + " in d = 3"};
  return {GateOutcome::admissible, ""};
}

bool is_admissible_pair(int d, const Exponent& p, const Exponent& r) {
  if (d < 1) return false;
  const Rational lhs = Rational(2) * p.reciprocal() + Rational(d) * r.reciprocal();
  if (lhs != Rational(d, 2)) return false;
  if (p == Exponent(2) && r.is_infinite()) return false;
  if (r.is_infinite()) return d == 1;
  const Rational rv = r.finite();
  if (rv < Rational(2)) return false;
  if (d >= 3) return rv <= Rational(2 * d, d - 2);
  return true;
}

Rational lemma_c_exponent(int d, Rational sigma) {
  if (sigma <= Rational(0)) throw DomainError("nonlinearity exponent: sigma must be > 0");
  if (d == 2) {
    if (sigma < Rational(1, 2)) return Rational(2) / (Rational(2) * sigma + Rational(1));
    return Rational(4, 3);
  }
  if (d == 3) {
    if (sigma > Rational(3, 2)) throw DomainError("nonlinearity exponent: d = 3 needs sigma <= 3/2");
    return Rational(6) / (Rational(2) * sigma + Rational(3));
  }
  throw DomainError("nonlinearity exponent: only d = 2 and d = 3 are covered");
}

// ---------------------------------------------------------------------------

double nonlinearity_quotient(const Field& u, double sigma, double s, double p) {
  Field f = u.physical_copy();
  for (auto& v : f.values()) v *= std::pow(std::norm(v), sigma);
  const double lhs = sobolev_norm(f, s, p);
  const double v_norm = std::sqrt(gradient_norm_sq(u) + lp_norm(u, 2.0) * lp_norm(u, 2.0));
  if (v_norm == 0.0) throw DomainError("nonlinearity quotient: zero field");
  return lhs / std::pow(v_norm, 2.0 * sigma + 1.0);
}

bool NonlinearityReport::passed() const {
  for (const auto& v : variants)
    if (v.violations != 0) return false;
  return !variants.empty();
}

NonlinearityReport verify_nonlinearity_estimate(const GridPtr& grid, Rational sigma,
                                                std::size_t corpus_size,
                                                const NonlinearityOptions& options) {
  NonlinearityReport report;
  report.d = grid->dim();
  report.sigma = sigma;
  report.slack = options.slack;
  report.corpus_size = corpus_size;

  const Rational p = lemma_c_exponent(grid->dim(), sigma);
  report.variants.push_back({"H^{1," + p.str() + "}", 1.0, p});
  // At sigma = 1 the fractional variant is the H^{1,6/5} estimate itself.
  if (grid->dim() == 3 && sigma > Rational(1) && sigma <= Rational(3, 2)) {
    const Rational s = Rational(2) - sigma;
    report.variants.push_back({"H^{" + s.str() + ",6/5}", s.value(), Rational(6, 5)});
  }

  const double sig = sigma.value();
  auto kappa_of = [&](std::size_t i) { return i % 2 == 0 ? options.kappa_smooth : options.kappa_rough; };
  auto corpus_field = [&](StreamRole role, std::size_t i) {
    RandomStream rng = RandomStream::derive(options.seed, role, i);
    const double m = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
    return random_smooth_field(grid, rng, kappa_of(i), m);
  };
  auto quotient = [&](const Field& u, const NonlinearityVariant& var) {
    return nonlinearity_quotient(u, sig, var.smoothness, var.integrability.value());
  };
  auto sweep = [&](StreamRole role) {
    // quotients[variant][field]; NaN marks a skipped zero field
    std::vector<std::vector<double>> q(report.variants.size(), std::vector<double>(corpus_size));
    parallel_for(corpus_size, options.workers, [&](std::size_t i) {
      const Field u = corpus_field(role, i);
      for (std::size_t v = 0; v < report.variants.size(); ++v)
        q[v][i] = lp_norm(u, 2.0) == 0.0 ? std::nan("") : quotient(u, report.variants[v]);
    });
    return q;
  };
  const auto fit = sweep(StreamRole::corpus_fit);
  const auto hold = sweep(StreamRole::corpus_holdout);

  // Starts for the hill climb: the best fit fields of each variant.
  const std::size_t nv = report.variants.size();
  std::vector<std::vector<std::size_t>> starts(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus_size; ++i)
      if (!std::isnan(fit[v][i])) idx.push_back(i);
    const std::size_t k = std::min(options.refine_starts, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](std::size_t a, std::size_t b) { return fit[v][a] > fit[v][b]; });
    idx.resize(k);
    starts[v] = std::move(idx);
  }
  std::vector<std::size_t> offsets(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) offsets[v + 1] = offsets[v] + starts[v].size();
  std::vector<double> refined(offsets[nv], 0.0);
  parallel_for(offsets[nv], options.workers, [&](std::size_t job) {
    const std::size_t v = std::upper_bound(offsets.begin(), offsets.end(), job) - offsets.begin() - 1;
    const std::size_t i = starts[v][job - offsets[v]];
    const auto& var = report.variants[v];
    RandomStream rng = RandomStream::derive(options.seed, StreamRole::corpus_refine, job);
    Field u = corpus_field(StreamRole::corpus_fit, i);
    double best = fit[v][i];
    double step = options.refine_step;
    for (std::size_t s = 0; s < options.refine_steps; ++s) {
      Field trial = random_smooth_field(grid, rng, kappa_of(i), step * step * lp_integral(u, 2.0));
      trial += u;
      const double q = quotient(trial, var);
      if (q > best) {
        best = q;
        u = std::move(trial);
      } else {
        step *= 0.97;
      }
    }
    refined[job] = best;
  });

  for (std::size_t v = 0; v < nv; ++v) {
    auto& var = report.variants[v];
    for (double x : fit[v]) {
      if (std::isnan(x)) ++var.skipped;
      else var.corpus_max = std::max(var.corpus_max, x);
    }
    var.fit_max = var.corpus_max;
    for (std::size_t j = offsets[v]; j < offsets[v + 1]; ++j) var.fit_max = std::max(var.fit_max, refined[j]);
    for (double x : hold[v]) {
      if (std::isnan(x)) {
        ++var.skipped;
        continue;
      }
      var.holdout_max = std::max(var.holdout_max, x);
      if (x > var.fit_max * (1.0 + options.slack)) ++var.violations;
    }
  }
  return report;
}

}  // namespace snls
