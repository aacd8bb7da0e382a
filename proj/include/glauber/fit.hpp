#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace glauber {

struct LineFit {
  double slope = std::nan("");
  double intercept = std::nan("");
  double r2 = std::nan("");
  std::size_t points = 0;
  bool ok = false;
};

/// Weighted least squares y = intercept + slope * x.
inline LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) throw std::invalid_argument("weighted_line_fit: size mismatch");
  LineFit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += w[i] * r * r;
  }
  f.r2 = syy > 0 ? 1 - sse / syy : 1.0;
  f.ok = std::isfinite(f.slope);
  return f;
}

struct PowerLawFit {
  LineFit line;
  double x_lo = std::nan("");  // fit window in the original variable
  double x_hi = std::nan("");
  bool poor = true;            // r2 below kPoorFitR2 or too few points
};

inline constexpr double kPoorFitR2 = 0.98;

/// Fits ln(est) against ln(x) using only points with est > 3 se. Weights are
/// 1/SE^2 of ln(est), i.e. (est/se)^2; uniform when no error is available.
inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> est, std::span<const double> se) {
  std::vector<double> lx, ly, w;
  PowerLawFit out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(est[i] > 0) || !(x[i] > 0)) continue;
    const bool have_se = std::isfinite(se[i]) && se[i] > 0;
    if (have_se && !(est[i] > 3 * se[i])) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(est[i]));
    w.push_back(have_se ? (est[i] / se[i]) * (est[i] / se[i]) : 1.0);
  }
  if (lx.empty()) return out;
  out.line = weighted_line_fit(lx, ly, w);
  out.x_lo = std::exp(lx.front());
  out.x_hi = std::exp(lx.back());
  out.poor = !out.line.ok || out.line.points < 3 || out.line.r2 < kPoorFitR2;
  return out;
}

}  // namespace glauber
