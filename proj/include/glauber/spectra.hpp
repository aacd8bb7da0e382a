#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "glauber/disorder.hpp"
#include "glauber/onespin.hpp"
#include "glauber/parallel.hpp"
#include "glauber/tridiagonal.hpp"

namespace glauber {

// Greedy left-to-right count of non-overlapping regular bonds {x, x+1},
// where excess[i] = 1 + C_x - C_{x+1} for the i-th bond. Greedy is maximal
// for unit-length intervals.
inline std::size_t greedy_regular_bonds(std::span<const double> excess, double lambda) {
  const double mag = std::abs(lambda);
  std::size_t count = 0;
  for (std::size_t i = 0; i < excess.size();) {
    if (excess[i] < mag) {
      ++count;
      i += 2;
    } else {
      ++i;
    }
  }
  return count;
}

/// Regular bonds from a raw sequence C_lo, C_lo+1, ...
inline std::size_t regular_bond_count(std::span<const double> C, double lambda) {
  std::vector<double> excess;
  for (std::size_t i = 0; i + 1 < C.size(); ++i) excess.push_back(1 + C[i] - C[i + 1]);
  return greedy_regular_bonds(excess, lambda);
}

/// Regular bonds {x, x+1} with lo <= x < x+1 <= hi.
inline std::size_t regular_bond_count(const DerivedField& derived, double lambda, Site lo, Site hi) {
  if (!derived.covers_c(lo, hi)) throw std::out_of_range("regular_bond_count: derived field does not cover window");
  std::vector<double> excess;
  for (Site x = lo; x < hi; ++x) excess.push_back(derived.C(x) + derived.one_minus_C(x + 1));
  return greedy_regular_bonds(excess, lambda);
}

/// Couplings on [-r-1, r+1] for realization `index`, enough for the operator on [-r, r].
inline CouplingField sample_realization(const TailModel& model, Site r, std::uint64_t seed, std::uint64_t index) {
  Stream stream(seed, index);
  return sample_couplings(model, -r - 1, r + 1, stream);
}

struct IdsCurve {
  std::vector<double> lambdas;  // negative, ascending in |lambda|
  std::vector<double> n_hat;
  std::vector<double> std_error;
  std::vector<std::uint64_t> total_counts;  // eigenvalues above lambda summed over realizations
  Site r = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct MeanSe {
  double mean;
  double se;  // NaN when fewer than two samples
};

inline MeanSe mean_and_se(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  double s = 0;
  for (double x : xs) s += x;
  const double mean = s / n;
  if (xs.size() < 2) return {mean, std::nan("")};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1) / n)};
}

/// Monte Carlo estimate of N(L1, lambda) = lim k(L1^(r), lambda) / (2r+1).
inline IdsCurve ids_estimate(const TailModel& model, std::span<const double> lambdas, Site r, std::size_t samples,
                             std::uint64_t seed, unsigned threads = 1) {
  if (samples < 2) throw std::invalid_argument("ids_estimate needs at least 2 realizations");
  if (r < 10) throw std::invalid_argument("ids_estimate needs r >= 10");
  const std::size_t G = lambdas.size();
  std::vector<std::uint32_t> counts(samples * G);
  parallel_for(samples, threads, [&](std::size_t m) {
    const auto field = sample_realization(model, r, seed, m);
    const auto J = build_l1(derive(field), -r, r);
    for (std::size_t g = 0; g < G; ++g) counts[m * G + g] = static_cast<std::uint32_t>(count_above(J, lambdas[g]));
  });
  IdsCurve curve;
  curve.lambdas.assign(lambdas.begin(), lambdas.end());
  curve.r = r;
  curve.samples = samples;
  curve.seed = seed;
  const double sites = static_cast<double>(2 * r + 1);
  std::vector<double> per(samples);
  for (std::size_t g = 0; g < G; ++g) {
    std::uint64_t total = 0;
    for (std::size_t m = 0; m < samples; ++m) {
      per[m] = counts[m * G + g] / sites;
      total += counts[m * G + g];
    }
    const auto ms = mean_and_se(per);
    curve.n_hat.push_back(ms.mean);
    curve.std_error.push_back(ms.se);
    curve.total_counts.push_back(total);
  }
  return curve;
}

/// gamma(lambda) = (1/4) ln(1/|lambda|).
inline double gamma_level(double lambda) {
  const double mag = std::abs(lambda);
  if (!(lambda < 0) || !(mag < 1)) throw std::domain_error("site classification needs -1 < lambda < 0");
  return 0.25 * std::log(1.0 / mag);
}

struct SiteClassification {
  double lambda = 0;
  double gamma = 0;
  std::vector<Site> strong;    // A: w_x > gamma
  std::vector<Site> quiet;     // B0: max(w_{x-1}, w_x, w_{x+1}) <= gamma, interior sites only
};

inline SiteClassification classify_sites(const CouplingField& field, double lambda) {
  SiteClassification cls;
  cls.lambda = lambda;
  cls.gamma = gamma_level(lambda);
  for (Site x = field.lo; x <= field.hi(); ++x)
    if (field.omega(x) > cls.gamma) cls.strong.push_back(x);
  for (Site x = field.lo + 1; x < field.hi(); ++x) {
    const double m = std::max({field.omega(x - 1), field.omega(x), field.omega(x + 1)});
    if (m <= cls.gamma) cls.quiet.push_back(x);
  }
  return cls;
}

/// Upper edge -1 + tanh(2 gamma(lambda)) = -2|lambda| / (1 + |lambda|) for
/// couplings bounded by gamma(lambda).
inline double quiet_edge_bound(double lambda) {
  const double mag = std::abs(lambda);
  return -2 * mag / (1 + mag);
}

/// Top eigenvalue of the principal submatrix of J on the B0 sites inside
/// [J.lo, J.hi]; nullopt when that set is empty.
inline std::optional<double> b0_submatrix_top(const JacobiMatrix& J, const SiteClassification& cls) {
  std::vector<Site> sites;
  for (Site x : cls.quiet)
    if (x >= J.lo && x <= J.hi) sites.push_back(x);
  if (sites.empty()) return std::nullopt;
  double top = -std::numeric_limits<double>::infinity();
  // Non-adjacent B0 sites decouple, so the submatrix is block diagonal.
  std::size_t i = 0;
  while (i < sites.size()) {
    std::size_t j = i;
    while (j + 1 < sites.size() && sites[j + 1] == sites[j] + 1) ++j;
    JacobiMatrix block;
    block.lo = sites[i];
    block.hi = sites[j];
    for (Site x = block.lo; x <= block.hi; ++x) {
      block.diag.push_back(J.d(x));
      if (x > block.lo) block.offdiag.push_back(J.b(x));
    }
    top = std::max(top, eigensolve(block, false).eigenvalues.back());
    i = j + 1;
  }
  return top;
}

}  // namespace glauber
