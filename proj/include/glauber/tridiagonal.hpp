#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "glauber/onespin.hpp"

namespace glauber {

namespace detail {

inline double tiny_pivot(double diag, double shift) {
  return -std::numeric_limits<double>::epsilon() * (std::abs(diag) + std::abs(shift) + 1.0);
}

// std::hypot is exact but slow; fall back to it only when squaring could
// overflow or underflow.
inline double fast_hypot(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  if (m > 1e-150 && m < 1e150) return std::sqrt(a * a + b * b);
  return std::hypot(a, b);
}

}  // namespace detail

/// Number of eigenvalues of J strictly greater than lambda (Sturm / LDL^T pivots).
/// A probe sitting exactly on an eigenvalue counts that eigenvalue as not above.
inline std::size_t count_above(const JacobiMatrix& J, double lambda) {
  const std::size_t n = J.size();
  std::size_t below_or_equal = 0;
  double pivot = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = J.diag[i] - lambda;
    if (i > 0) {
      const double b = J.offdiag[i - 1];
      p -= b * b / pivot;
    }
    if (p == 0) p = detail::tiny_pivot(J.diag[i], lambda);
    if (p < 0) ++below_or_equal;
    pivot = p;
  }
  return n - below_or_equal;
}

/// count_above for many probes at once; the probe loop is innermost so the
/// pivot recurrences run side by side.
inline std::vector<std::size_t> count_above_many(const JacobiMatrix& J, std::span<const double> lambdas) {
  const std::size_t n = J.size();
  std::vector<std::size_t> out(lambdas.size());
  constexpr std::size_t kBlock = 64;
  double pivot[kBlock];
  std::size_t below[kBlock];
  for (std::size_t start = 0; start < lambdas.size(); start += kBlock) {
    const std::size_t len = std::min(kBlock, lambdas.size() - start);
    const double* lam = lambdas.data() + start;
    for (std::size_t k = 0; k < len; ++k) {
      below[k] = 0;
      pivot[k] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double d = J.diag[i];
      const double b2 = i > 0 ? J.offdiag[i - 1] * J.offdiag[i - 1] : 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        double p = (d - lam[k]) - b2 / pivot[k];
        p = (p == 0) ? detail::tiny_pivot(d, lam[k]) : p;
        below[k] += (p < 0);
        pivot[k] = p;
      }
    }
    for (std::size_t k = 0; k < len; ++k) out[start + k] = n - below[k];
  }
  return out;
}

/// Same count through the eigenvector-ratio ("phase") recursion of -J at |lambda|:
///   ctg_{x+1} = (-d_x - |lambda|) / b_{x+1} - (b_x / b_{x+1}) / ctg_x,
/// counting negative ratios, with a unit virtual bond closing the last site.
/// Zero bonds split the matrix into independent blocks.
inline std::size_t phase_count(const JacobiMatrix& J, double lambda) {
  const std::size_t n = J.size();
  const double level = -lambda;  // eigenvalue level of -J
  std::size_t negatives = 0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;  // block is [start, end]
    while (end + 1 < n && J.offdiag[end] > 0) ++end;
    // f_{start-1} = 0: first ratio has no back term
    double ctg = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i <= end; ++i) {
      const double b_next = (i < end) ? J.offdiag[i] : 1.0;
      const double b_prev = (i > start) ? J.offdiag[i - 1] : 0.0;
      double next = (-J.diag[i] - level) / b_next;
      if (std::isfinite(ctg)) next -= (b_prev / b_next) / ctg;
      if (next == 0) next = detail::tiny_pivot(J.diag[i], lambda);
      if (next < 0) ++negatives;
      ctg = next;
    }
    start = end + 1;
  }
  return negatives;
}

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  // Column-major n x n; column j is the eigenvector of eigenvalues[j],
  // row i is site lo + i.
  std::optional<std::vector<double>> vectors;

  double vector(std::size_t site_index, std::size_t j) const { return (*vectors)[j * eigenvalues.size() + site_index]; }
};

/// Eigenvalues plus (u_j, p) for a handful of probe vectors p.
struct ProjectedSpectrum {
  std::vector<double> eigenvalues;               // ascending
  std::vector<std::vector<double>> projections;  // projections[k][j] = (u_j, probe_k)
};

namespace detail {

// Implicit QL with Wilkinson-type shifts (EISPACK tql2). `rows` holds m
// row vectors of length n that are multiplied from the right by every
// Givens rotation; starting from the identity they end up as the
// eigenvector matrix, starting from probe^T they end up as probe^T Q.
inline void tql2(std::vector<double>& d, std::vector<double> e, std::vector<double>& rows, std::size_t m) {
  const std::size_t n = d.size();
  if (n <= 1) return;
  // e[i] couples i and i+1 on entry; tql2 wants it shifted with e[n-1] = 0
  e.push_back(0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  double f = 0.0;
  double tst1 = 0.0;
  const std::size_t max_iter = 60 * n;
  std::size_t iter = 0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t mm = l;
    while (mm < n) {
      if (std::abs(e[mm]) <= eps * tst1) break;
      ++mm;
    }
    if (mm > l) {
      do {
        if (++iter > max_iter) throw std::runtime_error("tql2: no convergence");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = fast_hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[mm];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = mm; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = fast_hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < m; ++k) {
            double* row = rows.data() + k * n;
            const double t = row[ii + 1];
            row[ii + 1] = s * row[ii] + c * t;
            row[ii] = c * row[ii] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

inline std::vector<std::size_t> ascending_order(const std::vector<double>& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  return order;
}

}  // namespace detail

/// Checks every eigenvalue against Sturm counts: for ascending index j there
/// must be an eigenvalue of J within tol of lambda_j consistent with its rank.
inline bool sturm_consistent(const JacobiMatrix& J, std::span<const double> ascending, double tol) {
  const std::size_t n = J.size();
  if (ascending.size() != n) return false;
  std::vector<double> probes(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    probes[2 * j] = ascending[j] - tol;
    probes[2 * j + 1] = ascending[j] + tol;
  }
  const auto counts = count_above_many(J, probes);
  for (std::size_t j = 0; j < n; ++j) {
    // n - j eigenvalues are >= lambda_j, j + 1 are <= lambda_j
    if (counts[2 * j] < n - j) return false;
    if (counts[2 * j + 1] > n - j - 1) return false;
  }
  return true;
}

inline constexpr double kEigenTolerance = 1e-11;

/// Full eigendecomposition by implicit QL, cross-validated against Sturm counts.
inline SpectralDecomposition eigensolve(const JacobiMatrix& J, bool want_vectors) {
  const std::size_t n = J.size();
  if (n == 0) throw std::invalid_argument("eigensolve: empty matrix");
  std::vector<double> d = J.diag;
  std::vector<double> rows;
  std::size_t m = 0;
  if (want_vectors) {
    rows.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rows[i * n + i] = 1.0;
    m = n;
  }
  detail::tql2(d, J.offdiag, rows, m);
  const auto order = detail::ascending_order(d);
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.eigenvalues[j] = d[order[j]];
  if (!sturm_consistent(J, out.eigenvalues, kEigenTolerance))
    throw std::runtime_error("eigensolve: eigenvalues disagree with Sturm counts");
  if (want_vectors) {
    // rows[k*n + i] = Q(k, i): site k, eigenvector i
    std::vector<double> v(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) v[j * n + k] = rows[k * n + order[j]];
    out.vectors = std::move(v);
  }
  return out;
}

/// Eigenvalues and probe projections without forming eigenvectors: O(n^2).
inline ProjectedSpectrum eigensolve_projected(const JacobiMatrix& J, std::span<const std::vector<double>> probes) {
  const std::size_t n = J.size();
  if (n == 0) throw std::invalid_argument("eigensolve: empty matrix");
  const std::size_t m = probes.size();
  std::vector<double> rows(m * n);
  for (std::size_t k = 0; k < m; ++k) {
    if (probes[k].size() != n) throw std::invalid_argument("eigensolve_projected: probe length mismatch");
    std::copy(probes[k].begin(), probes[k].end(), rows.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  std::vector<double> d = J.diag;
  detail::tql2(d, J.offdiag, rows, m);
  const auto order = detail::ascending_order(d);
  ProjectedSpectrum out;
  out.eigenvalues.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.eigenvalues[j] = d[order[j]];
  if (!sturm_consistent(J, out.eigenvalues, kEigenTolerance))
    throw std::runtime_error("eigensolve: eigenvalues disagree with Sturm counts");
  out.projections.assign(m, std::vector<double>(n));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < n; ++j) out.projections[k][j] = rows[k * n + order[j]];
  return out;
}

/// Reference eigenvalues by Sturm bisection (slow: O(n^2 log(1/tol))).
inline std::vector<double> bisect_eigenvalues(const JacobiMatrix& J, double tol = 1e-13) {
  const std::size_t n = J.size();
  // Gershgorin interval
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(J.offdiag[i - 1]) : 0.0) + (i + 1 < n ? std::abs(J.offdiag[i]) : 0.0);
    lo = std::min(lo, J.diag[i] - r);
    hi = std::max(hi, J.diag[i] + r);
  }
  lo -= 1e-12;
  hi += 1e-12;
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    // j-th ascending eigenvalue: smallest x with count_above(x) <= n - j - 1
    double a = lo, b = hi;
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (count_above(J, mid) <= n - j - 1) b = mid;
      else a = mid;
    }
    out[j] = 0.5 * (a + b);
  }
  return out;
}

}  // namespace glauber
