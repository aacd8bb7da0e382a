#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "glauber/disorder.hpp"
#include "glauber/onespin.hpp"
#include "glauber/parallel.hpp"
#include "glauber/spectra.hpp"
#include "glauber/tridiagonal.hpp"

namespace glauber {

/// Spectrum of the windowed generator on [lo, hi] together with the spectral
/// weights of s_0 (through its v-expansion on [lo, 0]) and of v_0.
struct RealizationSpectrum {
  std::vector<double> eigenvalues;
  std::vector<double> sigma_proj;  // (u_j, w)
  std::vector<double> v0_proj;     // u_j(0)
  double mass = 0;
  double deficit = 0;
};

inline RealizationSpectrum realization_spectrum(const DerivedField& derived, Site lo, Site hi) {
  if (!(lo <= 0 && 0 <= hi)) throw std::invalid_argument("autocorrelation window must contain site 0");
  const auto J = build_l1(derived, lo, hi);
  const auto weights = sigma_weights(derived, lo);
  const std::size_t n = J.size();
  std::vector<std::vector<double>> probes(2, std::vector<double>(n, 0.0));
  for (Site x = lo; x <= 0; ++x) probes[0][static_cast<std::size_t>(x - lo)] = weights.w(x);
  probes[1][static_cast<std::size_t>(-lo)] = 1.0;
  auto spec = eigensolve_projected(J, probes);
  RealizationSpectrum out;
  out.eigenvalues = std::move(spec.eigenvalues);
  out.sigma_proj = std::move(spec.projections[0]);
  out.v0_proj = std::move(spec.projections[1]);
  out.mass = weights.mass;
  out.deficit = weights.deficit;
  return out;
}

/// sum_j proj_j^2 exp(t lambda_j) for every t.
inline std::vector<double> spectral_series(std::span<const double> eigenvalues, std::span<const double> proj,
                                           std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    double s = 0;
    for (std::size_t j = 0; j < eigenvalues.size(); ++j) s += proj[j] * proj[j] * std::exp(t * eigenvalues[j]);
    out.push_back(s);
  }
  return out;
}

struct AutocorrValues {
  std::vector<double> values;
  double mass = 0;
  double deficit = 0;
};

/// (e^{tL1} s_0, s_0) for one coupling realization.
inline AutocorrValues single_autocorr(const DerivedField& derived, Site lo, Site hi, std::span<const double> times) {
  const auto spec = realization_spectrum(derived, lo, hi);
  return {spectral_series(spec.eigenvalues, spec.sigma_proj, times), spec.mass, spec.deficit};
}

/// (e^{tL1} v_0, v_0) for one coupling realization.
inline std::vector<double> v0_autocorr(const DerivedField& derived, Site lo, Site hi, std::span<const double> times) {
  const auto spec = realization_spectrum(derived, lo, hi);
  return spectral_series(spec.eigenvalues, spec.v0_proj, times);
}

/// Laplace transform of the pooled empirical IDS:
/// (1 / (M (2r+1))) sum_{m,j} exp(t lambda_j^(m)).
inline double ids_laplace(std::span<const std::vector<double>> pooled, Site r, double t) {
  double s = 0;
  for (const auto& eigs : pooled)
    for (double l : eigs) s += std::exp(t * l);
  return s / (static_cast<double>(pooled.size()) * static_cast<double>(2 * r + 1));
}

struct CorrelationSeries {
  std::vector<double> times;
  std::vector<double> s_hat;
  std::vector<double> std_error;  // NaN when only one realization
  double mean_deficit = 0;
  Site r = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct DisorderAverage {
  CorrelationSeries sigma;
  std::vector<double> v0_mean, v0_se;                  // <(e^{tL1} v0, v0)>
  std::vector<double> laplace_mean, laplace_se;        // per-realization trace / (2r+1), averaged
  std::vector<std::vector<double>> per_realization;    // s_0 series, filled when requested
  std::vector<double> masses, deficits;
};

/// Disorder average of the s_0 autocorrelation over M realizations, each on
/// the operator window [-r, r] with its s_0 expansion truncated to [-r, 0].
inline DisorderAverage disorder_average(const TailModel& model, std::span<const double> times, Site r,
                                        std::size_t samples, std::uint64_t seed, unsigned threads = 1,
                                        bool keep_realizations = false) {
  if (!cosh4_moment(model).finite)
    throw std::invalid_argument("disorder_average: <cosh^4 w> is infinite for " + model.describe());
  if (samples < 1) throw std::invalid_argument("disorder_average needs at least one realization");
  if (r < 1) throw std::invalid_argument("disorder_average needs r >= 1");
  const std::size_t T = times.size();
  std::vector<double> sig(samples * T), v0(samples * T), lap(samples * T);
  std::vector<double> masses(samples), deficits(samples);
  const double sites = static_cast<double>(2 * r + 1);
  parallel_for(samples, threads, [&](std::size_t m) {
    const auto field = sample_realization(model, r, seed, m);
    const auto spec = realization_spectrum(derive(field), -r, r);
    const auto s = spectral_series(spec.eigenvalues, spec.sigma_proj, times);
    const auto v = spectral_series(spec.eigenvalues, spec.v0_proj, times);
    for (std::size_t k = 0; k < T; ++k) {
      sig[m * T + k] = s[k];
      v0[m * T + k] = v[k];
      double tr = 0;
      for (double l : spec.eigenvalues) tr += std::exp(times[k] * l);
      lap[m * T + k] = tr / sites;
    }
    masses[m] = spec.mass;
    deficits[m] = spec.deficit;
  });

  DisorderAverage out;
  auto& cs = out.sigma;
  cs.times.assign(times.begin(), times.end());
  cs.r = r;
  cs.samples = samples;
  cs.seed = seed;
  std::vector<double> col(samples);
  auto column = [&](const std::vector<double>& data, std::size_t k) {
    for (std::size_t m = 0; m < samples; ++m) col[m] = data[m * T + k];
    return mean_and_se(col);
  };
  for (std::size_t k = 0; k < T; ++k) {
    const auto s = column(sig, k);
    cs.s_hat.push_back(s.mean);
    cs.std_error.push_back(s.se);
    const auto v = column(v0, k);
    out.v0_mean.push_back(v.mean);
    out.v0_se.push_back(v.se);
    const auto l = column(lap, k);
    out.laplace_mean.push_back(l.mean);
    out.laplace_se.push_back(l.se);
  }
  cs.mean_deficit = mean_and_se(deficits).mean;
  if (keep_realizations) {
    out.per_realization.resize(samples);
    for (std::size_t m = 0; m < samples; ++m)
      out.per_realization[m].assign(sig.begin() + static_cast<std::ptrdiff_t>(m * T),
                                    sig.begin() + static_cast<std::ptrdiff_t>((m + 1) * T));
  }
  out.masses = std::move(masses);
  out.deficits = std::move(deficits);
  return out;
}

/// Geometric time grid from t_min to t_max with `per_decade` points per decade.
inline std::vector<double> geometric_grid(double t_min, double t_max, int per_decade) {
  if (!(t_min > 0 && t_max >= t_min && per_decade > 0)) throw std::invalid_argument("invalid geometric grid");
  const double decades = std::log10(t_max / t_min);
  const int steps = static_cast<int>(std::llround(decades * per_decade));
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) out.push_back(t_min * std::pow(10.0, static_cast<double>(i) / per_decade));
  return out;
}

}  // namespace glauber
