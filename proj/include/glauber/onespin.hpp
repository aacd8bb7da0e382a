#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "glauber/disorder.hpp"

namespace glauber {

/// Symmetric tridiagonal matrix indexed by sites lo..hi.
///
/// Row x is the coefficient of v_x = cosh(w_x) s_x - sinh(w_x) s_{x-1} in the
/// one-spin generator. `offdiag[i]` couples sites lo+i and lo+i+1.
struct JacobiMatrix {
  Site lo = 0;
  Site hi = -1;
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t size() const { return diag.size(); }
  double d(Site x) const { return diag.at(static_cast<std::size_t>(x - lo)); }
  // Bond (x-1, x).
  double b(Site x) const { return offdiag.at(static_cast<std::size_t>(x - lo - 1)); }
};

/// Tridiagonal truncation of the one-spin generator to sites [lo, hi]:
/// diag_x = -1 - C_x + C_{x+1}, offdiag_(x-1,x) = sqrt(C_x (1 - C_x)).
/// Needs C on [lo, hi+1], i.e. couplings on [lo-1, hi+1].
inline JacobiMatrix build_l1(const DerivedField& derived, Site lo, Site hi) {
  if (hi < lo) throw std::invalid_argument("build_l1: empty window");
  if (!derived.covers_c(lo, hi + 1)) {
    throw std::out_of_range("build_l1: window [" + std::to_string(lo) + "," + std::to_string(hi) +
                            "] needs couplings on [" + std::to_string(lo - 1) + "," + std::to_string(hi + 1) +
                            "], field covers [" + std::to_string(derived.lo()) + "," + std::to_string(derived.hi()) +
                            "]");
  }
  JacobiMatrix J;
  J.lo = lo;
  J.hi = hi;
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  J.diag.resize(n);
  J.offdiag.resize(n - 1);
  for (Site x = lo; x <= hi; ++x) {
    // -1 - C_x + C_{x+1} == -(C_x + (1 - C_{x+1}))
    J.diag[static_cast<std::size_t>(x - lo)] = -(derived.C(x) + derived.one_minus_C(x + 1));
  }
  for (Site x = lo + 1; x <= hi; ++x) {
    const double c = derived.C(x);
    const double cc = derived.one_minus_C(x);
    J.offdiag[static_cast<std::size_t>(x - lo - 1)] = std::sqrt(c) * std::sqrt(cc);
  }
  return J;
}

// CSV debug dump; offdiag_to_left is empty at the left edge.
inline void write_csv(const JacobiMatrix& J, std::ostream& os) {
  const auto old = os.precision(17);
  os << "x,diag,offdiag_to_left\n";
  for (Site x = J.lo; x <= J.hi; ++x) {
    os << x << ',' << J.d(x) << ',';
    if (x > J.lo) os << J.b(x);
    os << '\n';
  }
  os.precision(old);
}

/// Expansion of s_0 in the v-basis truncated to sites [lo, 0].
struct SigmaWeights {
  Site lo = 0;
  std::vector<double> weights;  // weights[i] belongs to site lo + i
  double mass = 0;              // sum of squared weights
  double deficit = 1;           // 1 - mass, evaluated as prod a_j^2 over [lo, 0]
  bool underflow = false;       // some weight was flushed to zero below e^-700

  double w(Site x) const { return weights.at(static_cast<std::size_t>(x - lo)); }
};

inline SigmaWeights sigma_weights(const DerivedField& derived, Site lo) {
  if (lo > 0) throw std::invalid_argument("sigma_weights: window must contain site 0");
  if (lo < derived.lo() || derived.hi() < 0) throw std::out_of_range("sigma_weights: derived field must cover [lo, 0]");
  constexpr double floor = -700.0;
  SigmaWeights s;
  s.lo = lo;
  s.weights.assign(static_cast<std::size_t>(1 - lo), 0.0);
  // ln w_x = (1/2) ln u_x + sum_{j = x+1}^{0} ln a_j
  double log_prod = 0;
  for (Site x = 0; x >= lo; --x) {
    const double lw = 0.5 * derived.log_u(x) + log_prod;
    double& w = s.weights[static_cast<std::size_t>(x - lo)];
    if (lw < floor) {
      if (std::isfinite(lw)) s.underflow = true;
      w = 0;
    } else {
      w = std::exp(lw);
    }
    log_prod += derived.log_a(x);
  }
  double mass = 0;
  for (double w : s.weights) mass += w * w;
  s.mass = mass;
  s.deficit = std::exp(2 * log_prod);
  return s;
}

}  // namespace glauber
