#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "glauber/disorder.hpp"

namespace glauber {

enum class RateKind { g1, g2 };

// g1(mu) = ln P(w > (1/4) ln(1/mu)),  g2(mu) = 2 ln P(w > (1/2) ln(1/(c mu))).
struct RateFunction {
  RateKind kind = RateKind::g1;
  TailModel model = TailModel::exponential(5);
  double c = 0.5;
};

namespace detail {

// Both unbounded families give g(mu) = -A (ln(1/(s mu)))^alpha.
struct PowerLogForm {
  double A;
  double alpha;
  double s;
};

inline std::optional<PowerLogForm> power_log_form(const RateFunction& rf) {
  const bool first = rf.kind == RateKind::g1;
  if (const auto* e = std::get_if<Exponential>(&rf.model.family()))
    return first ? PowerLogForm{e->k / 4, 1.0, 1.0} : PowerLogForm{e->k, 1.0, rf.c};
  if (const auto* s = std::get_if<Stretched>(&rf.model.family())) {
    const double a = s->alpha;
    return first ? PowerLogForm{std::pow(0.25, a), a, 1.0} : PowerLogForm{2 * std::pow(0.5, a), a, rf.c};
  }
  return std::nullopt;
}

inline void check_domain(const RateFunction& rf, double mu) {
  if (!(mu > 0 && mu < 1)) throw std::domain_error("rate function needs mu in (0,1)");
  if (rf.kind == RateKind::g2 && !(rf.c > 0 && rf.c < 1)) throw std::domain_error("g2 needs 0 < c < 1");
}

}  // namespace detail

inline double rate_eval(const RateFunction& rf, double mu) {
  detail::check_domain(rf, mu);
  if (const auto f = detail::power_log_form(rf)) return -f->A * std::pow(std::log(1 / (f->s * mu)), f->alpha);
  if (rf.kind == RateKind::g1) return log_tail(rf.model, 0.25 * std::log(1 / mu));
  return 2 * log_tail(rf.model, 0.5 * std::log(1 / (rf.c * mu)));
}

// Central second difference with a step relative to mu.
inline double numeric_curvature(const RateFunction& rf, double mu) {
  const double h = std::min(1e-4 * mu, 0.5 * (1 - mu));
  return (rate_eval(rf, mu + h) - 2 * rate_eval(rf, mu) + rate_eval(rf, mu - h)) / (h * h);
}

inline double rate_derivative(const RateFunction& rf, double mu) {
  detail::check_domain(rf, mu);
  if (const auto f = detail::power_log_form(rf)) {
    const double L = std::log(1 / (f->s * mu));
    return f->A * f->alpha * std::pow(L, f->alpha - 1) / mu;
  }
  const double h = std::min(1e-6 * mu, 0.5 * (1 - mu));
  return (rate_eval(rf, mu + h) - rate_eval(rf, mu - h)) / (2 * h);
}

inline double rate_curvature(const RateFunction& rf, double mu) {
  detail::check_domain(rf, mu);
  if (const auto f = detail::power_log_form(rf)) {
    const double L = std::log(1 / (f->s * mu));
    const double a = f->alpha;
    const double lower = (a == 1.0) ? 0.0 : (a - 1) * std::pow(L, a - 2);
    return -f->A * a * (lower + std::pow(L, a - 1)) / (mu * mu);
  }
  return numeric_curvature(rf, mu);
}

struct LegendrePoint {
  double t = 0;
  double mu = 0;            // minimizer of t mu - g(mu)
  double G = 0;             // t mu* - g(mu*)
  double gpp = 0;           // g''(mu*)
  double gpp_numeric = 0;   // second-difference estimate of the same
  bool interior = false;    // false: minimum sits on the boundary, envelope not available
};

/// G(t) = min_{mu in (0,1)} (t mu - g(mu)) by bisection on t - g'(mu) in log mu.
inline LegendrePoint legendre_min(const RateFunction& rf, double t) {
  if (!(t > 0)) throw std::domain_error("legendre_min needs t > 0");
  constexpr double eps = 1e-12;
  auto slope = [&](double log_mu) { return t - rate_derivative(rf, std::exp(log_mu)); };
  double a = std::log(eps), b = std::log1p(-eps);
  LegendrePoint p;
  p.t = t;
  const double sa = slope(a), sb = slope(b);
  if (!std::isfinite(sa) || !std::isfinite(sb) || sa >= 0 || sb <= 0) {
    const double edge = (std::isfinite(sa) && sa >= 0) ? eps : 1 - eps;
    p.mu = edge;
    p.G = t * edge - rate_eval(rf, edge);
    p.gpp = std::numeric_limits<double>::quiet_NaN();
    p.gpp_numeric = p.gpp;
    p.interior = false;
    return p;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (slope(mid) < 0) a = mid;
    else b = mid;
  }
  const double mu = std::exp(0.5 * (a + b));
  p.mu = mu;
  p.G = t * mu - rate_eval(rf, mu);
  p.gpp = rate_curvature(rf, mu);
  p.gpp_numeric = numeric_curvature(rf, mu);
  p.interior = std::isfinite(p.G) && p.gpp < 0;
  return p;
}

struct EnvelopePoint {
  double t = 0;
  LegendrePoint p1, p2;
  bool available = false;
  double log_upper = 0;  // ln[C1 (t e^{-G1} / sqrt(-g1''))^{1/2}]
  double log_lower = 0;  // ln[C2 (t e^{-G2} / sqrt(-g2''))^2]
  double upper = 0;
  double lower = 0;
  // Exponential family only: C1 (1+t)^{-k/8} and C2 (1+t)^{-2k}; NaN otherwise.
  double power_upper = std::numeric_limits<double>::quiet_NaN();
  double power_lower = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<EnvelopePoint> envelope(const TailModel& model, std::span<const double> times, double c, double C1,
                                           double C2) {
  const RateFunction g1{RateKind::g1, model, c};
  const RateFunction g2{RateKind::g2, model, c};
  std::vector<EnvelopePoint> out;
  for (double t : times) {
    EnvelopePoint e;
    e.t = t;
    e.p1 = legendre_min(g1, t);
    e.p2 = legendre_min(g2, t);
    e.available = e.p1.interior && e.p2.interior;
    if (e.available) {
      e.log_upper = std::log(C1) + 0.5 * (std::log(t) - e.p1.G - 0.5 * std::log(-e.p1.gpp));
      e.log_lower = std::log(C2) + 2.0 * (std::log(t) - e.p2.G - 0.5 * std::log(-e.p2.gpp));
      e.upper = std::exp(e.log_upper);
      e.lower = std::exp(e.log_lower);
    } else {
      e.log_upper = e.log_lower = e.upper = e.lower = std::numeric_limits<double>::quiet_NaN();
    }
    if (const auto* ex = std::get_if<Exponential>(&model.family())) {
      e.power_upper = C1 * std::pow(1 + t, -ex->k / 8);
      e.power_lower = C2 * std::pow(1 + t, -2 * ex->k);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace glauber
