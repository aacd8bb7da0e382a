#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "glauber/harness.hpp"

namespace glauber {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

namespace detail {

inline bool near_eigenvalue(std::span<const double> eigs, double lambda, double tol) {
  for (double e : eigs)
    if (std::abs(e - lambda) <= tol) return true;
  return false;
}

inline std::size_t count_from_eigenvalues(std::span<const double> eigs, double lambda) {
  std::size_t c = 0;
  for (double e : eigs) c += e > lambda;
  return c;
}

}  // namespace detail

/// ln f convex in t: divided-difference slopes of ln f are nondecreasing.
inline bool log_convex(std::span<const double> t, std::span<const double> f, double tol) {
  for (std::size_t i = 2; i < t.size(); ++i) {
    const double s1 = (std::log(f[i - 1]) - std::log(f[i - 2])) / (t[i - 1] - t[i - 2]);
    const double s2 = (std::log(f[i]) - std::log(f[i - 1])) / (t[i] - t[i - 1]);
    if (s2 - s1 < -tol) return false;
  }
  return true;
}

/// Invariant suite at desk-check scale. Every check draws its instances from
/// the config's model and seed.
inline std::vector<CheckResult> run_invariant_checks(const ExperimentConfig& cfg) {
  std::vector<CheckResult> out;
  const TailModel model = cfg.model;
  const std::uint64_t seed = cfg.seed;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  // counting routes and the spectrum box
  {
    std::size_t mismatches = 0, box = 0, probes = 0;
    for (std::uint64_t m = 0; m < 100; ++m) {
      Stream s(seed, 1000 + m);
      const Site r = 5 + static_cast<Site>(s.uniform() * 40);
      const auto J = build_l1(derive(sample_couplings(model, -r - 1, r + 1, s)), -r, r);
      const auto eigs = eigensolve(J, false).eigenvalues;
      if (eigs.front() < -2 - 1e-10 || eigs.back() > 1e-10) ++box;
      for (int p = 0; p < 20; ++p) {
        const double lambda = -2.2 * s.uniform();
        if (detail::near_eigenvalue(eigs, lambda, 1e-12)) continue;
        ++probes;
        const auto want = detail::count_from_eigenvalues(eigs, lambda);
        if (count_above(J, lambda) != want || phase_count(J, lambda) != want) ++mismatches;
      }
    }
    add("counting routes agree", mismatches == 0, std::to_string(probes) + " probes");
    add("spectrum inside [-2, 0]", box == 0, std::to_string(box) + " violations");
  }

  // homogeneous dispersion
  {
    double worst = 0;
    for (double w : {0.1, 0.5, 1.0}) {
      const Site n = 60;
      const auto J = build_l1(derive(CouplingField(-1, std::vector<double>(n + 2, w))), 0, n - 1);
      const auto eigs = eigensolve(J, false).eigenvalues;
      for (Site j = 1; j <= n; ++j) {
        const double e = -1 + std::tanh(2 * w) * std::cos(j * std::numbers::pi / (n + 1));
        worst = std::max(worst, std::abs(eigs[n - j] - e));
      }
    }
    add("homogeneous dispersion", worst <= 1e-8, "max error " + fmt_double(worst));
  }

  // regular-bond lower bound and B0 upper bound
  {
    std::size_t lower_fail = 0, upper_fail = 0, edge_fail = 0;
    for (std::uint64_t m = 0; m < 100; ++m) {
      const Site r = 50;
      const auto field = sample_realization(model, r, seed + 1, m);
      const auto der = derive(field);
      const auto J = build_l1(der, -r, r);
      for (double lambda : {-0.01, -0.05, -0.2, -0.5, -0.9}) {
        const auto k = count_above(J, lambda);
        if (k < regular_bond_count(der, lambda, -r, r)) ++lower_fail;
        const auto cls = classify_sites(field, lambda);
        const auto top = b0_submatrix_top(J, cls);
        if (top && *top > quiet_edge_bound(lambda) + 1e-10) ++edge_fail;
        if (k > J.size() - cls.quiet.size()) ++upper_fail;
      }
    }
    add("regular bonds bound count from below", lower_fail == 0, std::to_string(lower_fail) + " violations");
    add("quiet-site submatrix below edge", edge_fail == 0, std::to_string(edge_fail) + " violations");
    add("count bounded by non-quiet sites", upper_fail == 0, std::to_string(upper_fail) + " violations");
  }

  // mass bookkeeping and complete monotonicity
  if (cosh4_moment(model).finite) {
    const std::vector<double> times = geometric_grid(0.01, 100, 10);
    std::vector<double> with_zero{0.0};
    with_zero.insert(with_zero.end(), times.begin(), times.end());
    double worst = 0;
    bool monotone = true;
    for (std::uint64_t m = 0; m < 20; ++m) {
      const Site r = 40;
      const auto der = derive(sample_realization(model, r, seed + 2, m));
      const auto v = single_autocorr(der, -r, r, with_zero);
      worst = std::max(worst, std::abs(v.values[0] + v.deficit - 1));
      for (std::size_t i = 1; i < v.values.size(); ++i) monotone = monotone && v.values[i] > 0 && v.values[i] <= v.values[i - 1];
      monotone = monotone && log_convex(with_zero, v.values, 1e-10);
    }
    add("mass + deficit = 1", worst <= 1e-10, "max error " + fmt_double(worst));
    add("autocorrelation completely monotone", monotone, "");
  }

  // detailed balance of the flip rates
  {
    double worst = 0;
    Stream s(seed, 77);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> w(5);
      for (double& x : w) x = 15 * s.uniform();
      const CouplingField field(0, w);
      auto cfg_spin = gibbs_sample(field, s);
      const Site x = 1 + static_cast<Site>(s.uniform() * 3);
      const double delta = flip_energy(cfg_spin, x, field);
      const double c1 = glauber_rate(cfg_spin, x, field);
      cfg_spin.flip(x);
      const double c2 = glauber_rate(cfg_spin, x, field);
      worst = std::max(worst, std::abs(c1 / c2 * std::exp(delta) - 1));
    }
    add("detailed balance", worst <= 1e-14, "max relative error " + fmt_double(worst));
  }

  // Legendre stationarity for unbounded families
  if (model.unbounded()) {
    double worst = 0;
    for (auto kind : {RateKind::g1, RateKind::g2}) {
      const RateFunction rf{kind, model, cfg.c};
      for (double t : geometric_grid(10, 1e4, 5)) {
        const auto p = legendre_min(rf, t);
        if (p.interior) worst = std::max(worst, std::abs(t - rate_derivative(rf, p.mu)) / std::max(t, 1.0));
      }
    }
    add("Legendre stationarity", worst <= 1e-6, "max relative residual " + fmt_double(worst));
  }

  // schedule independence
  {
    const std::vector<double> lambdas{-0.3, -0.1};
    const auto a = ids_estimate(model, lambdas, 20, 16, seed, 1);
    const auto b = ids_estimate(model, lambdas, 20, 16, seed, 4);
    add("ids bit-identical across thread counts", a.n_hat == b.n_hat && a.std_error == b.std_error, "");
  }
  return out;
}

inline int run_validate(const ExperimentConfig& cfg, std::ostream& log) {
  const auto checks = run_invariant_checks(cfg);
  bool ok = true;
  for (const auto& c : checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) log << " (" << c.detail << ")";
    log << '\n';
    ok = ok && c.passed;
  }
  return ok ? kSuccess : kValidationFailure;
}

}  // namespace glauber
