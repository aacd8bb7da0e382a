#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "glauber/asymptotics.hpp"
#include "glauber/autocorr.hpp"
#include "glauber/disorder.hpp"
#include "glauber/fit.hpp"
#include "glauber/io.hpp"
#include "glauber/kmc.hpp"
#include "glauber/spectra.hpp"

namespace glauber {

using nlohmann::json;

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kConfigError = 2 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  json model_spec;
  TailModel model = TailModel::exponential(5);
  Site r = 200;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  std::vector<double> lambdas;  // negative, ascending in |lambda|
  std::vector<double> times;    // ascending, > 0
  double c = 0.5;
  double C1 = 1.0;
  double C2 = 1.0;
  bool check_moment = true;
  std::size_t kmc_trajectories = 20000;
  Site kmc_sites = 65;
  std::vector<double> kmc_times{0.0, 0.5, 1.0, 2.0, 4.0};
  std::optional<double> fit_t_min, fit_t_max;
  std::string ids_input, autocorr_input;
  std::string out;
  std::string dump_realizations;
  unsigned threads = 1;
};

inline TailModel model_from_json(const json& m) {
  if (!m.is_object() || !m.contains("family")) throw ConfigError("model needs a 'family'");
  const auto family = m.at("family").get<std::string>();
  try {
    if (family == "exponential") return TailModel::exponential(m.at("k").get<double>());
    if (family == "stretched") return TailModel::stretched(m.at("alpha").get<double>());
    if (family == "uniform") return TailModel::uniform_bounded(m.at("gamma_max").get<double>());
    if (family == "constant") return TailModel::constant(m.value("value", 0.0));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model parameters: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown model family '" + family + "'");
}

/// Log-spaced lambda grid from -min_mag to -max_mag (ascending in |lambda|).
inline std::vector<double> lambda_grid(double min_mag, double max_mag, int points) {
  if (!(min_mag > 0 && max_mag >= min_mag && points >= 1)) throw ConfigError("invalid lambda grid");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out.push_back(-min_mag * std::pow(max_mag / min_mag, f));
  }
  return out;
}

/// Parses and validates a config; fails with ConfigError before any run starts.
inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.model_spec = j.value("model", json{{"family", "exponential"}, {"k", 5.0}});
    cfg.model = model_from_json(cfg.model_spec);
    cfg.r = j.value("r", cfg.r);
    cfg.samples = j.value("samples", cfg.samples);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.c = j.value("c", cfg.c);
    cfg.C1 = j.value("C1", cfg.C1);
    cfg.C2 = j.value("C2", cfg.C2);
    cfg.check_moment = j.value("check_moment", cfg.check_moment);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out = j.value("out", cfg.out);
    cfg.dump_realizations = j.value("dump_realizations", cfg.dump_realizations);

    if (j.contains("lambdas")) {
      cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
    } else {
      const auto g = j.value("lambda_grid", json{{"min", 0.03}, {"max", 0.3}, {"points", 10}});
      cfg.lambdas = lambda_grid(g.at("min").get<double>(), g.at("max").get<double>(), g.at("points").get<int>());
    }
    if (j.contains("times")) {
      cfg.times = j.at("times").get<std::vector<double>>();
    } else {
      const auto g = j.value("time_grid", json{{"min", 0.1}, {"max", 1e4}, {"per_decade", 25}});
      cfg.times = geometric_grid(g.at("min").get<double>(), g.at("max").get<double>(), g.at("per_decade").get<int>());
    }
    if (j.contains("kmc")) {
      const auto& k = j.at("kmc");
      cfg.kmc_trajectories = k.value("trajectories", cfg.kmc_trajectories);
      cfg.kmc_sites = k.value("sites", cfg.kmc_sites);
      if (k.contains("times")) cfg.kmc_times = k.at("times").get<std::vector<double>>();
    }
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      if (f.contains("t_min")) cfg.fit_t_min = f.at("t_min").get<double>();
      if (f.contains("t_max")) cfg.fit_t_max = f.at("t_max").get<double>();
    }
    if (j.contains("inputs")) {
      cfg.ids_input = j.at("inputs").value("ids", "");
      cfg.autocorr_input = j.at("inputs").value("autocorr", "");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (cfg.r < 1) throw ConfigError("r must be >= 1");
  if (cfg.samples < 1) throw ConfigError("samples must be >= 1");
  if (!(cfg.c > 0 && cfg.c < 1)) throw ConfigError("c must lie in (0,1)");
  if (!(cfg.C1 > 0 && cfg.C2 > 0)) throw ConfigError("C1 and C2 must be positive");
  if (cfg.lambdas.empty() || cfg.times.empty()) throw ConfigError("grids must be nonempty");
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
    if (!(cfg.lambdas[i] < 0)) throw ConfigError("lambda grid must be negative");
    if (i > 0 && !(std::abs(cfg.lambdas[i]) > std::abs(cfg.lambdas[i - 1])))
      throw ConfigError("lambda grid must be sorted by increasing |lambda|");
  }
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    if (!(cfg.times[i] >= 0)) throw ConfigError("times must be >= 0");
    if (i > 0 && !(cfg.times[i] > cfg.times[i - 1])) throw ConfigError("time grid must be ascending");
  }
  for (std::size_t i = 0; i < cfg.kmc_times.size(); ++i)
    if (cfg.kmc_times[i] < 0 || (i > 0 && !(cfg.kmc_times[i] > cfg.kmc_times[i - 1])))
      throw ConfigError("kmc time grid must be ascending and >= 0");
  if (cfg.kmc_sites < 3) throw ConfigError("kmc window needs at least 3 sites");
  if (cfg.threads < 1) cfg.threads = 1;
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

/// Resolved config as JSON (grids expanded) for provenance. Threads are left
/// out so outputs do not depend on the worker count.
inline json resolved_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = cfg.model_spec;
  j["r"] = cfg.r;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  j["lambdas"] = cfg.lambdas;
  j["times"] = cfg.times;
  j["c"] = cfg.c;
  j["C1"] = cfg.C1;
  j["C2"] = cfg.C2;
  j["check_moment"] = cfg.check_moment;
  j["kmc"] = {{"trajectories", cfg.kmc_trajectories}, {"sites", cfg.kmc_sites}, {"times", cfg.kmc_times}};
  json fit = json::object();
  if (cfg.fit_t_min) fit["t_min"] = *cfg.fit_t_min;
  if (cfg.fit_t_max) fit["t_max"] = *cfg.fit_t_max;
  j["fit"] = fit;
  return j;
}

inline std::vector<std::string> provenance(const ExperimentConfig& cfg, const std::string& command) {
  return {std::string("glauber ") + kVersion + " " + command, "config " + resolved_json(cfg).dump()};
}

/// Decay experiments need 1 < <cosh^4 w> < infinity.
inline void require_finite_moment(const ExperimentConfig& cfg) {
  if (!cfg.check_moment) return;
  const auto m = cosh4_moment(cfg.model);
  if (!m.finite) throw ConfigError("<cosh^4 w> diverges for " + cfg.model.describe() + " (exponential needs k > 4)");
  if (!(m.value > 1)) throw ConfigError("<cosh^4 w> must exceed 1 for " + cfg.model.describe());
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// subcommands

inline CsvWriter ids_table(const ExperimentConfig& cfg, const IdsCurve& curve) {
  CsvWriter csv(provenance(cfg, "ids"), {"lambda", "n_hat", "stderr", "r", "samples"});
  for (std::size_t g = 0; g < curve.lambdas.size(); ++g)
    csv.row() << curve.lambdas[g] << curve.n_hat[g] << curve.std_error[g] << static_cast<std::int64_t>(curve.r)
              << static_cast<std::uint64_t>(curve.samples);
  return csv;
}

inline IdsCurve run_ids(const ExperimentConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  auto curve = ids_estimate(cfg.model, cfg.lambdas, cfg.r, cfg.samples, cfg.seed, cfg.threads);
  log << "ids: " << cfg.samples << " realizations, r=" << cfg.r << ", " << sw.seconds() << " s\n";
  for (std::size_t g = 0; g < curve.lambdas.size(); ++g)
    log << "  lambda=" << curve.lambdas[g] << " counts=" << curve.total_counts[g] << '\n';
  if (!cfg.out.empty()) ids_table(cfg, curve).save(cfg.out);
  return curve;
}

inline CsvWriter autocorr_table(const ExperimentConfig& cfg, const CorrelationSeries& s) {
  CsvWriter csv(provenance(cfg, "autocorr"), {"t", "s_hat", "stderr", "mean_deficit"});
  for (std::size_t k = 0; k < s.times.size(); ++k)
    csv.row() << s.times[k] << s.s_hat[k] << s.std_error[k] << s.mean_deficit;
  return csv;
}

inline DisorderAverage run_autocorr(const ExperimentConfig& cfg, std::ostream& log) {
  require_finite_moment(cfg);
  Stopwatch sw;
  const bool dump = !cfg.dump_realizations.empty();
  auto avg = disorder_average(cfg.model, cfg.times, cfg.r, cfg.samples, cfg.seed, cfg.threads, dump);
  log << "autocorr: " << cfg.samples << " realizations, r=" << cfg.r << ", mean deficit "
      << avg.sigma.mean_deficit << ", " << sw.seconds() << " s\n";
  if (!cfg.out.empty()) autocorr_table(cfg, avg.sigma).save(cfg.out);
  if (dump) {
    std::ofstream f(cfg.dump_realizations);
    if (!f) throw std::runtime_error("cannot write " + cfg.dump_realizations);
    for (std::size_t m = 0; m < avg.per_realization.size(); ++m) {
      json line{{"realization", m},
                {"seed", cfg.seed},
                {"mass", avg.masses[m]},
                {"deficit", avg.deficits[m]},
                {"values", avg.per_realization[m]}};
      f << line.dump() << '\n';
    }
  }
  return avg;
}

struct KmcComparison {
  CouplingField field;
  TrajectoryStats kmc;
  std::vector<double> spectral;
  std::vector<double> z;  // (kmc - spectral) / se
};

/// One fixed realization on a `kmc_sites` window centred at 0, simulated by
/// KMC and evaluated through the open-chain one-spin generator.
inline KmcComparison kmc_compare(const TailModel& model, Site sites, std::span<const double> times,
                                 std::size_t trajectories, std::uint64_t seed, unsigned threads) {
  const Site lo = -(sites / 2);
  const Site hi = lo + sites - 1;
  Stream couplings(seed, 0);
  KmcComparison out;
  out.field = sample_couplings(model, lo, hi, couplings);
  const Stream dynamics = Stream(seed, 1).substream(0);
  out.kmc = simulate_autocorr(out.field, times, trajectories, dynamics, 0, threads);
  const auto open = derive(open_chain_field(out.field));
  out.spectral = single_autocorr(open, lo, hi, times).values;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double se = out.kmc.std_error[k];
    const double diff = out.kmc.estimate[k] - out.spectral[k];
    out.z.push_back(se > 0 ? diff / se : (diff == 0 ? 0.0 : std::copysign(INFINITY, diff)));
  }
  return out;
}

inline KmcComparison run_kmc(const ExperimentConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  auto cmp = kmc_compare(cfg.model, cfg.kmc_sites, cfg.kmc_times, cfg.kmc_trajectories, cfg.seed, cfg.threads);
  log << "kmc: " << cfg.kmc_trajectories << " trajectories on " << cfg.kmc_sites << " sites, " << sw.seconds()
      << " s\n";
  for (std::size_t k = 0; k < cmp.z.size(); ++k)
    log << "  t=" << cfg.kmc_times[k] << " kmc=" << cmp.kmc.estimate[k] << " spectral=" << cmp.spectral[k]
        << " z=" << cmp.z[k] << '\n';
  if (!cfg.out.empty()) {
    CsvWriter csv(provenance(cfg, "kmc"), {"t", "kmc_estimate", "stderr", "n_traj"});
    for (std::size_t k = 0; k < cmp.z.size(); ++k)
      csv.row() << cfg.kmc_times[k] << cmp.kmc.estimate[k] << cmp.kmc.std_error[k]
                << static_cast<std::uint64_t>(cmp.kmc.trajectories);
    csv.save(cfg.out);
    CsvWriter side(provenance(cfg, "kmc"), {"t", "kmc_estimate", "stderr", "spectral", "z"});
    for (std::size_t k = 0; k < cmp.z.size(); ++k)
      side.row() << cfg.kmc_times[k] << cmp.kmc.estimate[k] << cmp.kmc.std_error[k] << cmp.spectral[k] << cmp.z[k];
    side.save(cfg.out + ".compare.csv");
  }
  return cmp;
}

inline std::vector<EnvelopePoint> run_bounds(const ExperimentConfig& cfg, std::ostream& log) {
  require_finite_moment(cfg);
  auto env = envelope(cfg.model, cfg.times, cfg.c, cfg.C1, cfg.C2);
  log << "bounds: " << env.size() << " time points for " << cfg.model.describe() << '\n';
  if (!cfg.out.empty()) {
    CsvWriter csv(provenance(cfg, "bounds"),
                  {"t", "mu1", "G1", "gpp1", "mu2", "G2", "gpp2", "upper", "lower", "c", "C1", "C2"});
    for (const auto& e : env) {
      const double nan = std::nan("");
      csv.row() << e.t << (e.p1.interior ? e.p1.mu : nan) << (e.p1.interior ? e.p1.G : nan) << e.p1.gpp
                << (e.p2.interior ? e.p2.mu : nan) << (e.p2.interior ? e.p2.G : nan) << e.p2.gpp << e.upper
                << e.lower << cfg.c << cfg.C1 << cfg.C2;
    }
    csv.save(cfg.out);
  }
  return env;
}

// ---------------------------------------------------------------------------
// report

struct DecayFit {
  PowerLawFit fit;
  double window_lo = std::nan(""), window_hi = std::nan("");
  double C1_fit = std::nan(""), C2_fit = std::nan("");        // extremal constants: sandwich holds on the window
  double C1_lsq = std::nan(""), C2_lsq = std::nan("");        // least squares in log space
};

/// Picks the fit window: the configured one, else the decade [t0, 10 t0] with
/// the largest t0 on which every point exceeds 3 standard errors.
inline std::pair<double, double> reliable_decade(std::span<const double> t, std::span<const double> est,
                                                 std::span<const double> se) {
  auto reliable = [&](std::size_t i) {
    return est[i] > 0 && (!(std::isfinite(se[i]) && se[i] > 0) || est[i] > 3 * se[i]);
  };
  std::pair<double, double> best{std::nan(""), std::nan("")};
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0)) continue;
    const double end = 10 * t[i] * (1 + 1e-9);
    if (t.back() < 10 * t[i] * (1 - 1e-9)) break;
    bool ok = true;
    std::size_t j = i;
    for (; j < t.size() && t[j] <= end; ++j) ok = ok && reliable(j);
    if (ok) best = {t[i], t[j - 1]};
  }
  return best;
}

inline DecayFit fit_decay(const TailModel& model, std::span<const double> t, std::span<const double> est,
                          std::span<const double> se, std::optional<double> t_min, std::optional<double> t_max,
                          double c) {
  DecayFit out;
  auto window = reliable_decade(t, est, se);
  if (t_min) window.first = *t_min;
  if (t_max) window.second = *t_max;
  if (!std::isfinite(window.first) || !std::isfinite(window.second)) return out;
  out.window_lo = window.first;
  out.window_hi = window.second;
  std::vector<double> wt, we, ws;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= window.first * (1 - 1e-12) && t[i] <= window.second * (1 + 1e-12)) {
      wt.push_back(t[i]);
      we.push_back(est[i]);
      ws.push_back(se[i]);
    }
  out.fit = fit_power_law(wt, we, ws);
  const auto env = envelope(model, wt, c, 1.0, 1.0);
  double lo_ratio = INFINITY, hi_ratio = -INFINITY, sum_u = 0, sum_l = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (!env[i].available || !(we[i] > 0)) continue;
    const double ls = std::log(we[i]);
    hi_ratio = std::max(hi_ratio, ls - env[i].log_upper);
    lo_ratio = std::min(lo_ratio, ls - env[i].log_lower);
    sum_u += ls - env[i].log_upper;
    sum_l += ls - env[i].log_lower;
    ++used;
  }
  if (used > 0) {
    out.C1_fit = std::exp(hi_ratio);
    out.C2_fit = std::exp(lo_ratio);
    out.C1_lsq = std::exp(sum_u / static_cast<double>(used));
    out.C2_lsq = std::exp(sum_l / static_cast<double>(used));
  }
  return out;
}

struct IdsFit {
  PowerLawFit fit;  // ln n_hat vs ln |lambda|
  std::size_t kept = 0, dropped = 0;
};

inline constexpr std::uint64_t kMinIdsCounts = 100;

/// Drops grid points with fewer than 100 eigenvalues counted over all
/// realizations, then fits the log-log slope of n_hat against |lambda|.
inline IdsFit fit_ids(std::span<const double> lambdas, std::span<const double> n_hat, std::span<const double> se,
                      std::span<const std::uint64_t> total_counts) {
  IdsFit out;
  std::vector<double> x, y, s;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (total_counts[i] < kMinIdsCounts) {
      ++out.dropped;
      continue;
    }
    ++out.kept;
    x.push_back(std::abs(lambdas[i]));
    y.push_back(n_hat[i]);
    s.push_back(se[i]);
  }
  out.fit = fit_power_law(x, y, s);
  return out;
}

inline json fit_json(const PowerLawFit& f) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"slope", num(f.line.slope)}, {"intercept", num(f.line.intercept)}, {"r2", num(f.line.r2)},
          {"points", f.line.points},    {"x_lo", num(f.x_lo)},                {"x_hi", num(f.x_hi)},
          {"poor_fit", f.poor}};
}

inline CsvTable read_input(const std::string& path) {
  try {
    return read_csv(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("report input: ") + e.what());
  }
}

inline json run_report(const ExperimentConfig& cfg, std::ostream& log) {
  require_finite_moment(cfg);
  if (cfg.ids_input.empty() && cfg.autocorr_input.empty())
    throw ConfigError("report needs inputs.ids and/or inputs.autocorr");
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rep;
  rep["version"] = kVersion;
  rep["config"] = resolved_json(cfg);
  rep["model"] = cfg.model.describe();
  const auto* ex = std::get_if<Exponential>(&cfg.model.family());
  const auto* st = std::get_if<Stretched>(&cfg.model.family());

  if (!cfg.autocorr_input.empty()) {
    const auto table = read_input(cfg.autocorr_input);
    const auto t = table.column("t"), s = table.column("s_hat"), se = table.column("stderr");
    const auto d = fit_decay(cfg.model, t, s, se, cfg.fit_t_min, cfg.fit_t_max, cfg.c);
    json a;
    a["window"] = {num(d.window_lo), num(d.window_hi)};
    a["loglog_fit"] = fit_json(d.fit);
    a["C1_fit"] = num(d.C1_fit);
    a["C2_fit"] = num(d.C2_fit);
    a["C1_lsq"] = num(d.C1_lsq);
    a["C2_lsq"] = num(d.C2_lsq);
    if (ex) {
      a["sandwich_slopes"] = {-2 * ex->k, -ex->k / 8};
      a["slope_in_band"] = d.fit.line.ok && d.fit.line.slope >= -2 * ex->k - 1 && d.fit.line.slope <= -ex->k / 8 + 0.5;
    }
    if (st) {
      // ln S against (ln t)^alpha; envelope coefficients -4(1/2)^alpha and -(1/2)(1/4)^alpha
      std::vector<double> x, y, w;
      for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= d.window_lo && t[i] <= d.window_hi && s[i] > 0 && t[i] > 1) {
          x.push_back(std::pow(std::log(t[i]), st->alpha));
          y.push_back(std::log(s[i]));
          w.push_back(se[i] > 0 ? (s[i] / se[i]) * (s[i] / se[i]) : 1.0);
        }
      const auto lf = weighted_line_fit(x, y, w);
      a["logt_alpha_fit"] = {{"coefficient", num(lf.slope)}, {"r2", num(lf.r2)}, {"points", lf.points}};
      a["logt_alpha_band"] = {-4 * std::pow(0.5, st->alpha), -0.5 * std::pow(0.25, st->alpha)};
    }
    rep["autocorr"] = a;
    log << "report: autocorr slope " << d.fit.line.slope << " on [" << d.window_lo << ", " << d.window_hi << "]\n";
  }
  if (!cfg.ids_input.empty()) {
    const auto table = read_input(cfg.ids_input);
    const auto lam = table.column("lambda"), nh = table.column("n_hat"), se = table.column("stderr");
    const auto rr = table.column("r"), mm = table.column("samples");
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < lam.size(); ++i)
      counts.push_back(static_cast<std::uint64_t>(std::llround(nh[i] * (2 * rr[i] + 1) * mm[i])));
    const auto f = fit_ids(lam, nh, se, counts);
    json a;
    a["loglog_fit"] = fit_json(f.fit);
    a["kept"] = f.kept;
    a["dropped"] = f.dropped;
    if (ex) {
      a["band"] = {ex->k / 4, ex->k};
      a["slope_in_band"] = f.fit.line.ok && f.fit.line.slope >= ex->k / 4 - 0.5 && f.fit.line.slope <= ex->k + 0.5;
    }
    rep["ids"] = a;
    log << "report: ids slope " << f.fit.line.slope << " (" << f.kept << " points)\n";
  }
  if (!cfg.out.empty()) {
    std::ofstream o(cfg.out);
    if (!o) throw std::runtime_error("cannot write " + cfg.out);
    o << rep.dump(2) << '\n';
  }
  return rep;
}

}  // namespace glauber
