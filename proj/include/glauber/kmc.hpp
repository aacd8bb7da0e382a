#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "glauber/disorder.hpp"
#include "glauber/parallel.hpp"
#include "glauber/rng.hpp"
#include "glauber/spectra.hpp"

namespace glauber {

struct SpinConfig {
  Site lo = 0;
  std::vector<std::int8_t> spins;

  Site hi() const { return lo + static_cast<Site>(spins.size()) - 1; }
  int s(Site x) const { return spins[static_cast<std::size_t>(x - lo)]; }
  void flip(Site x) { spins[static_cast<std::size_t>(x - lo)] *= -1; }
};

// Probability that spins x-1 and x agree under the free-boundary Gibbs
// measure: e^w / (e^w + e^-w).
inline double agree_probability(double omega) { return 1.0 / (1.0 + std::exp(-2.0 * omega)); }

/// Exact sample of the open-chain Gibbs measure on the field's window.
/// The coupling at the left edge site has no partner inside the window.
inline SpinConfig gibbs_sample(const CouplingField& field, Stream& stream) {
  SpinConfig cfg;
  cfg.lo = field.lo;
  cfg.spins.resize(field.size());
  cfg.spins[0] = stream.coin(0.5) ? 1 : -1;
  for (std::size_t i = 1; i < field.size(); ++i) {
    const bool agree = stream.coin(agree_probability(field.values[i]));
    cfg.spins[i] = static_cast<std::int8_t>(agree ? cfg.spins[i - 1] : -cfg.spins[i - 1]);
  }
  return cfg;
}

/// H(s^(x)) - H(s) for H = -sum w_y s_{y-1} s_y, bonds leaving the window dropped.
inline double flip_energy(const SpinConfig& cfg, Site x, const CouplingField& field) {
  double delta = 0;
  const int sx = cfg.s(x);
  if (x > cfg.lo) delta += 2.0 * field.omega(x) * cfg.s(x - 1) * sx;
  if (x < cfg.hi()) delta += 2.0 * field.omega(x + 1) * sx * cfg.s(x + 1);
  return delta;
}

/// Glauber rate 1 / (1 + e^{Delta}); satisfies c(s) / c(s^(x)) = e^{-Delta}.
inline double glauber_rate(const SpinConfig& cfg, Site x, const CouplingField& field) {
  return 1.0 / (1.0 + std::exp(flip_energy(cfg, x, field)));
}

struct TrajectoryStats {
  std::vector<double> times;
  std::vector<double> estimate;   // <s_c(0) s_c(t)>
  std::vector<double> std_error;  // batch means
  std::vector<double> center_mean;
  std::vector<double> center_se;
  std::size_t trajectories = 0;
  std::size_t batches = 0;
};

/// Rejection kinetic Monte Carlo of the open chain: attempts arrive at total
/// rate n (window size), a uniformly chosen site flips with probability equal
/// to its Glauber rate. Every trajectory starts from an independent Gibbs
/// sample and draws from `stream.substream(trajectory index)`.
inline TrajectoryStats simulate_autocorr(const CouplingField& field, std::span<const double> times,
                                         std::size_t trajectories, const Stream& stream, Site center,
                                         unsigned threads = 1, std::size_t batches = 100) {
  if (times.empty()) throw std::invalid_argument("simulate_autocorr: empty time grid");
  if (times.front() < 0) throw std::invalid_argument("simulate_autocorr: negative time");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] < times[k - 1]) throw std::invalid_argument("simulate_autocorr: time grid must be ascending");
  if (center < field.lo || center > field.hi()) throw std::invalid_argument("simulate_autocorr: center outside window");
  if (trajectories < 1) throw std::invalid_argument("simulate_autocorr: need trajectories");

  const std::size_t T = times.size();
  const auto n = static_cast<double>(field.size());
  batches = std::max<std::size_t>(1, std::min(batches, trajectories));
  std::vector<double> prod_sum(batches * T, 0.0), center_sum(batches * T, 0.0);

  parallel_for(batches, threads, [&](std::size_t b) {
    const std::size_t first = b * trajectories / batches;
    const std::size_t last = (b + 1) * trajectories / batches;
    for (std::size_t i = first; i < last; ++i) {
      Stream st = stream.substream(i);
      SpinConfig cfg = gibbs_sample(field, st);
      const int s0 = cfg.s(center);
      double t_event = st.exponential() / n;
      for (std::size_t k = 0; k < T; ++k) {
        while (t_event <= times[k]) {
          auto offset = static_cast<Site>(st.uniform() * n);
          if (offset >= static_cast<Site>(field.size())) offset = static_cast<Site>(field.size()) - 1;
          const Site x = field.lo + offset;
          if (st.uniform() < glauber_rate(cfg, x, field)) cfg.flip(x);
          t_event += st.exponential() / n;
        }
        prod_sum[b * T + k] += s0 * cfg.s(center);
        center_sum[b * T + k] += cfg.s(center);
      }
    }
  });

  TrajectoryStats out;
  out.times.assign(times.begin(), times.end());
  out.trajectories = trajectories;
  out.batches = batches;
  std::vector<double> prod_means(batches), center_means(batches), w(batches);
  for (std::size_t b = 0; b < batches; ++b)
    w[b] = static_cast<double>((b + 1) * trajectories / batches - b * trajectories / batches);
  auto batch_stats = [&](const std::vector<double>& sums, std::size_t k) {
    double total = 0;
    for (std::size_t b = 0; b < batches; ++b) total += sums[b * T + k];
    const double mean = total / static_cast<double>(trajectories);
    if (batches < 2) return MeanSe{mean, std::nan("")};
    double ss = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const double bm = sums[b * T + k] / w[b];
      ss += (bm - mean) * (bm - mean);
    }
    const auto B = static_cast<double>(batches);
    return MeanSe{mean, std::sqrt(ss / (B - 1) / B)};
  };
  for (std::size_t k = 0; k < T; ++k) {
    const auto p = batch_stats(prod_sum, k);
    out.estimate.push_back(p.mean);
    out.std_error.push_back(p.se);
    const auto c = batch_stats(center_sum, k);
    out.center_mean.push_back(c.mean);
    out.center_se.push_back(c.se);
  }
  return out;
}

/// Field on [lo-1, hi+1] whose one-spin generator on [lo, hi] is exactly the
/// open chain simulated on `field`: the edge coupling w_lo and the outer
/// couplings are zeroed so C_lo = C_{hi+1} = 0.
inline CouplingField open_chain_field(const CouplingField& field) {
  std::vector<double> v(field.size() + 2, 0.0);
  for (std::size_t i = 1; i < field.size(); ++i) v[i + 1] = field.values[i];
  return CouplingField(field.lo - 1, std::move(v), field.provenance);
}

}  // namespace glauber
