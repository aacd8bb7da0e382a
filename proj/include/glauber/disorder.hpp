#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "glauber/rng.hpp"

namespace glauber {

using Site = std::int64_t;

// Coupling-distribution families. Tails are exact: P(w > u) = exp(-k u) and
// exp(-u^alpha); UniformBounded is uniform on [0, gamma_max]. Constant is a
// point mass used for homogeneous and decoupled chains.
struct Exponential {
  double k;
};
struct Stretched {
  double alpha;
};
struct UniformBounded {
  double gamma_max;
};
struct Constant {
  double value;
};

class TailModel {
 public:
  using Family = std::variant<Exponential, Stretched, UniformBounded, Constant>;

  static TailModel exponential(double k) {
    if (!(k > 0) || !std::isfinite(k)) throw std::invalid_argument("exponential tail needs rate k > 0");
    return TailModel(Exponential{k});
  }
  static TailModel stretched(double alpha) {
    if (!(alpha > 1) || !std::isfinite(alpha))
      throw std::invalid_argument("stretched tail needs exponent alpha > 1");
    return TailModel(Stretched{alpha});
  }
  static TailModel uniform_bounded(double gamma_max) {
    if (!(gamma_max > 0) || !std::isfinite(gamma_max))
      throw std::invalid_argument("uniform coupling needs gamma_max > 0");
    return TailModel(UniformBounded{gamma_max});
  }
  static TailModel constant(double value) {
    if (!(value >= 0) || !std::isfinite(value))
      throw std::invalid_argument("constant coupling must be finite and >= 0");
    return TailModel(Constant{value});
  }

  const Family& family() const { return family_; }

  template <class F>
  bool is() const {
    return std::holds_alternative<F>(family_);
  }

  // True when P(w > K) > 0 for every K.
  bool unbounded() const { return is<Exponential>() || is<Stretched>(); }

  std::string describe() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Exponential>) return "exponential(k=" + std::to_string(f.k) + ")";
          else if constexpr (std::is_same_v<T, Stretched>) return "stretched(alpha=" + std::to_string(f.alpha) + ")";
          else if constexpr (std::is_same_v<T, UniformBounded>)
            return "uniform(gamma_max=" + std::to_string(f.gamma_max) + ")";
          else return "constant(value=" + std::to_string(f.value) + ")";
        },
        family_);
  }

 private:
  explicit TailModel(Family f) : family_(f) {}
  Family family_;
};

/// ln P(w > u) for u >= 0; may be -infinity.
inline double log_tail(const TailModel& model, double u) {
  if (!(u >= 0)) throw std::domain_error("tail argument must be >= 0");
  return std::visit(
      [u](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        constexpr double ninf = -std::numeric_limits<double>::infinity();
        if constexpr (std::is_same_v<T, Exponential>) return -f.k * u;
        else if constexpr (std::is_same_v<T, Stretched>) return -std::pow(u, f.alpha);
        else if constexpr (std::is_same_v<T, UniformBounded>) return u < f.gamma_max ? std::log1p(-u / f.gamma_max) : ninf;
        else return u < f.value ? 0.0 : ninf;
      },
      model.family());
}

inline double tail_probability(const TailModel& model, double u) { return std::exp(log_tail(model, u)); }

/// Maps a uniform variate U in [0,1] to a coupling with P(w > u) = tail(u).
inline double inverse_cdf(const TailModel& model, double uniform) {
  if (!(uniform >= 0 && uniform <= 1)) throw std::domain_error("inverse_cdf needs U in [0,1]");
  return std::visit(
      [uniform](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Exponential>) return -std::log(uniform) / f.k;
        else if constexpr (std::is_same_v<T, Stretched>) return std::pow(-std::log(uniform), 1.0 / f.alpha);
        else if constexpr (std::is_same_v<T, UniformBounded>) return f.gamma_max * uniform;
        else return f.value;
      },
      model.family());
}

// ln cosh u without overflow.
inline double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2 * a)) - std::log(2.0);
}

struct MomentResult {
  bool finite;
  double value;  // +infinity when the moment diverges
};

/// <cosh(w)^4> by adaptive quadrature against the model density.
inline MomentResult cosh4_moment(const TailModel& model) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double tol = 1e-11;
  return std::visit(
      [&](const auto& f) -> MomentResult {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          // integrand ~ exp((4 - k) u) / 16 at large u
          if (f.k <= 4) return {false, inf};
          const double log_k = std::log(f.k);
          auto integrand = [&](double u) { return std::exp(4 * log_cosh(u) + log_k - f.k * u); };
          boost::math::quadrature::exp_sinh<double> integrator;
          return {true, integrator.integrate(integrand, 0.0, inf, tol)};
        } else if constexpr (std::is_same_v<T, Stretched>) {
          const double log_alpha = std::log(f.alpha);
          auto integrand = [&](double u) {
            if (u <= 0) return 0.0;
            return std::exp(4 * log_cosh(u) + log_alpha + (f.alpha - 1) * std::log(u) - std::pow(u, f.alpha));
          };
          boost::math::quadrature::exp_sinh<double> integrator;
          return {true, integrator.integrate(integrand, 0.0, inf, tol)};
        } else if constexpr (std::is_same_v<T, UniformBounded>) {
          auto integrand = [&](double u) { return std::exp(4 * log_cosh(u)) / f.gamma_max; };
          double err = 0;
          const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, f.gamma_max,
                                                                                       15, tol, &err);
          return {true, v};
        } else {
          return {true, std::exp(4 * log_cosh(f.value))};
        }
      },
      model.family());
}

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
};

/// Finite window of couplings; values[i] is w at site lo + i and couples
/// spins lo + i - 1 and lo + i.
struct CouplingField {
  Site lo = 0;
  std::vector<double> values;
  Provenance provenance;

  CouplingField() = default;
  CouplingField(Site lo_, std::vector<double> v, Provenance p = {}) : lo(lo_), values(std::move(v)), provenance(p) {
    if (values.size() < 3) throw std::invalid_argument("coupling window needs at least 3 sites");
    for (double w : values)
      if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("couplings must be finite and >= 0");
  }

  Site hi() const { return lo + static_cast<Site>(values.size()) - 1; }
  std::size_t size() const { return values.size(); }
  bool covers(Site a, Site b) const { return a >= lo && b <= hi(); }
  double omega(Site x) const { return values.at(static_cast<std::size_t>(x - lo)); }
};

inline CouplingField sample_couplings(const TailModel& model, Site lo, Site hi, Stream& stream) {
  if (hi < lo) throw std::invalid_argument("sample_couplings: lo > hi");
  std::vector<double> v(static_cast<std::size_t>(hi - lo + 1));
  for (double& w : v) w = inverse_cdf(model, stream.uniform_open());
  return CouplingField(lo, std::move(v), {stream.seed(), stream.id()});
}

/// Per-site a = tanh w, u = 1 - a^2 = 1/cosh^2 w, and the bond variables
/// C_x = a_x^2 u_{x-1} / (u_x + (1 - u_x) u_{x-1}), all evaluated through
/// q_x = a_x^2 u_{x-1} / u_x so that C = q/(1+q) and 1 - C = 1/(1+q) are both
/// free of cancellation for large couplings.
class DerivedField {
 public:
  explicit DerivedField(const CouplingField& field) : lo_(field.lo) {
    const std::size_t n = field.size();
    if (n < 2) throw std::invalid_argument("derive needs at least 2 sites");
    a_.resize(n);
    u_.resize(n);
    log_a_.resize(n);
    log_u_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = field.values[i];
      const double e = std::exp(-2 * w);
      a_[i] = std::tanh(w);
      log_u_[i] = std::log(4.0) - 2 * w - 2 * std::log1p(e);
      u_[i] = 4 * e / ((1 + e) * (1 + e));
      log_a_[i] = std::log1p(-e) - std::log1p(e);
    }
    c_.resize(n - 1);
    cc_.resize(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      const double q = a_[i] * a_[i] * std::exp(log_u_[i - 1] - log_u_[i]);
      c_[i - 1] = 1.0 / (1.0 + 1.0 / q);
      cc_[i - 1] = 1.0 / (1.0 + q);
    }
  }

  Site lo() const { return lo_; }
  Site hi() const { return lo_ + static_cast<Site>(a_.size()) - 1; }
  // C is defined on [lo + 1, hi].
  bool covers_c(Site a, Site b) const { return a >= lo_ + 1 && b <= hi(); }

  double a(Site x) const { return a_.at(idx(x)); }
  double u(Site x) const { return u_.at(idx(x)); }
  double log_a(Site x) const { return log_a_.at(idx(x)); }
  double log_u(Site x) const { return log_u_.at(idx(x)); }
  double C(Site x) const { return c_.at(idx(x) - 1); }
  // 1 - C_x, computed without cancellation.
  double one_minus_C(Site x) const { return cc_.at(idx(x) - 1); }

 private:
  std::size_t idx(Site x) const {
    if (x < lo_ || x > hi()) throw std::out_of_range("site " + std::to_string(x) + " outside derived window");
    return static_cast<std::size_t>(x - lo_);
  }

  Site lo_;
  std::vector<double> a_, u_, log_a_, log_u_, c_, cc_;
};

inline DerivedField derive(const CouplingField& field) { return DerivedField(field); }

}  // namespace glauber
