#pragma once

#include <cmath>
#include <cstdlib>
#include <thread>
#include <utility>
#include <vector>

#include "ruinopt/rng.hpp"
#include "ruinopt/scaling.hpp"

// Monte Carlo estimation of ruin probabilities under a fixed retention, for
// the jump model (compound Poisson claims + Brownian perturbation) and its
// diffusion approximation.  Ruin between discrete events is detected by the
// exact Brownian-bridge crossing probability, paths are absorbed as "safe"
// at a high barrier, and every path owns an RNG stream keyed by its index so
// results are bit-identical for any worker count.

namespace ruinopt {

struct SimConfig {
  RetentionFunction retention = Full{};
  double x0 = 1.0;
  double horizon = 0.0;   // <= 0: default 12 (B - x0) / net drift
  double barrier = 0.0;   // <= 0: default k/rho with e^{-k} < 1e-4 e^{-rho x0}
  double max_step = 0.0;  // <= 0: default per model
  long long paths = 100000;
  long long first_path = 0;  // stream offset: path i uses stream first_path + i
  std::uint64_t seed = 1;
};

struct SimResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long long paths = 0;
  double censored_fraction = 0.0;  // horizon hits, counted as survival
  std::uint64_t seed = 0;
};

namespace detail {

inline int worker_count(long long paths) {
  int w = 0;
  if (const char* env = std::getenv("RUINOPT_THREADS")) w = std::atoi(env);
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  if (w <= 0) w = 1;
  if (static_cast<long long>(w) > paths) w = static_cast<int>(paths);
  return w;
}

enum class PathOutcome { kRuin, kSafe, kCensored };

// Runs fn(path_index) for every path and returns {ruined, censored} counts.
// Integer reduction over per-worker tallies: independent of partitioning.
template <class PathFn>
std::pair<long long, long long> count_outcomes(long long paths, const PathFn& fn) {
  const int workers = worker_count(paths);
  std::vector<long long> ruined(workers, 0), censored(workers, 0);
  auto run_range = [&](int w, long long lo, long long hi) {
    for (long long i = lo; i < hi; ++i) {
      const PathOutcome out = fn(i);
      if (out == PathOutcome::kRuin) ++ruined[w];
      if (out == PathOutcome::kCensored) ++censored[w];
    }
  };
  if (workers == 1) {
    run_range(0, 0, paths);
  } else {
    std::vector<std::thread> pool;
    const long long chunk = (paths + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long lo = w * chunk;
      const long long hi = std::min(paths, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, w, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  long long r = 0, c = 0;
  for (int w = 0; w < workers; ++w) {
    r += ruined[w];
    c += censored[w];
  }
  return {r, c};
}

inline SimResult summarize(long long ruined, long long censored, const SimConfig& cfg) {
  SimResult res;
  const double n = static_cast<double>(cfg.paths);
  res.estimate = static_cast<double>(ruined) / n;
  res.std_error = std::sqrt(res.estimate * (1.0 - res.estimate) / n);
  const double half = 1.959963984540054 * res.std_error;
  res.ci_low = std::max(0.0, res.estimate - half);
  res.ci_high = std::min(1.0, res.estimate + half);
  res.paths = cfg.paths;
  res.censored_fraction = static_cast<double>(censored) / n;
  res.seed = cfg.seed;
  return res;
}

inline void validate_sim_config(const SimConfig& cfg) {
  validate(cfg.retention);
  if (cfg.paths < 1) throw ConfigError("simulation requires at least one path");
  if (cfg.first_path < 0) throw ConfigError("first path index must be non-negative");
  if (!(cfg.x0 >= 0.0)) throw ConfigError("initial surplus must be non-negative");
  if (cfg.horizon < 0.0) throw ConfigError("horizon must be positive, or zero for the default");
  if (cfg.barrier < 0.0) throw ConfigError("barrier must be positive, or zero for the default");
  if (cfg.max_step < 0.0) throw ConfigError("max step must be positive, or zero for the default");
}

// Safe barrier: smallest multiple of 1/rho with e^{-rho B} < 1e-4 e^{-rho x0},
// so absorbed paths would almost never have ruined.
inline double default_barrier(double rho, double x0) {
  const double k = std::floor(rho * x0 + std::log(1e4)) + 1.0;
  return k / rho;
}

// Exact Brownian advance over [0, dt] from x > 0: endpoint sampled normally,
// interior sub-zero crossing recovered by the bridge probability
// exp(-2 x x_end / (sigma^2 dt)).  Returns true when the segment ruins.
inline bool brownian_segment_ruins(double& x, double drift, double sigma, double dt,
                                   RngStream& rng) {
  const double xe = x + drift * dt + sigma * std::sqrt(dt) * rng.normal();
  if (xe <= 0.0) return true;
  const double expo = 2.0 * x * xe / (sigma * sigma * dt);
  if (expo < 40.0 && rng.u01() < std::exp(-expo)) return true;
  x = xe;
  return false;
}

}  // namespace detail

inline SimResult simulate_classical(const SimConfig& cfg, const ModelParams& p,
                                    const ClaimDistribution& dist,
                                    const QuadratureSpec& spec = {}) {
  validate(p, dist);
  detail::validate_sim_config(cfg);
  if (!net_profit_holds(p, dist, cfg.retention, spec)) {
    throw NetProfitViolated("net-profit condition fails for the simulated retention");
  }

  if (cfg.x0 == 0.0) {  // surplus starts at the ruin boundary
    auto res = detail::summarize(cfg.paths, 0, cfg);
    return res;
  }
  if (cfg.barrier > 0.0 && cfg.x0 >= cfg.barrier) {  // starts at the safe barrier
    return detail::summarize(0, 0, cfg);
  }

  const double surplus_m = surplus_drift(p, dist, cfg.retention, spec);
  const double net_m = net_drift(p, dist, cfg.retention, spec);
  const double barrier = cfg.barrier > 0.0
                             ? cfg.barrier
                             : detail::default_barrier(
                                   adjustment_for_retention(p, dist, cfg.retention, spec),
                                   cfg.x0);
  const double horizon =
      cfg.horizon > 0.0 ? cfg.horizon : 12.0 * (barrier - cfg.x0) / net_m;
  const double max_step = cfg.max_step > 0.0 ? cfg.max_step : 20.0 / p.lambda;

  const double lambda = p.lambda, beta = p.beta, x0 = cfg.x0;
  const RetentionFunction& ret = cfg.retention;
  const std::uint64_t seed = cfg.seed;
  const long long first = cfg.first_path;

  auto path = [&, surplus_m, barrier, horizon, max_step, lambda, beta,
               x0](long long idx) -> detail::PathOutcome {
    RngStream rng(seed, static_cast<std::uint64_t>(first + idx));
    double x = x0, t = 0.0;
    while (true) {
      double target = t - std::log(rng.u01()) / lambda;  // next claim time
      const bool jump = target < horizon;
      if (!jump) target = horizon;
      while (t < target) {
        const double dt = std::min(max_step, target - t);
        if (detail::brownian_segment_ruins(x, surplus_m, beta, dt, rng)) {
          return detail::PathOutcome::kRuin;
        }
        t += dt;
        if (x >= barrier) return detail::PathOutcome::kSafe;
      }
      if (!jump) return detail::PathOutcome::kCensored;
      x -= retained(ret, sample(dist, rng));
      if (x <= 0.0) return detail::PathOutcome::kRuin;
    }
  };

  const auto [ruined, censored] = detail::count_outcomes(cfg.paths, path);
  return detail::summarize(ruined, censored, cfg);
}

inline SimResult simulate_diffusion(const SimConfig& cfg, const ModelParams& p,
                                    const ClaimDistribution& dist,
                                    const QuadratureSpec& spec = {}) {
  validate(p, dist);
  detail::validate_sim_config(cfg);

  // rho_D_of_R enforces the net-profit condition and feeds the barrier default.
  const double rho = rho_D_of_R(p, dist, cfg.retention, spec);

  if (cfg.x0 == 0.0) return detail::summarize(cfg.paths, 0, cfg);
  if (cfg.barrier > 0.0 && cfg.x0 >= cfg.barrier) return detail::summarize(0, 0, cfg);

  const auto m = retention_moments(dist, cfg.retention, 0.0, spec);
  const double drift = net_drift(p, dist, cfg.retention, spec);
  const double sigma = std::sqrt(p.lambda * m.er2 + p.beta * p.beta);
  const double barrier =
      cfg.barrier > 0.0 ? cfg.barrier : detail::default_barrier(rho, cfg.x0);
  const double horizon =
      cfg.horizon > 0.0 ? cfg.horizon : 12.0 * (barrier - cfg.x0) / drift;
  const double span = barrier - cfg.x0;
  const double max_step =
      cfg.max_step > 0.0
          ? cfg.max_step
          : std::min(span * span / (64.0 * sigma * sigma), horizon / 16.0);

  const double x0 = cfg.x0;
  const std::uint64_t seed = cfg.seed;
  const long long first = cfg.first_path;

  auto path = [=](long long idx) -> detail::PathOutcome {
    RngStream rng(seed, static_cast<std::uint64_t>(first + idx));
    double x = x0, t = 0.0;
    while (t < horizon) {
      const double dt = std::min(max_step, horizon - t);
      if (detail::brownian_segment_ruins(x, drift, sigma, dt, rng)) {
        return detail::PathOutcome::kRuin;
      }
      t += dt;
      if (x >= barrier) return detail::PathOutcome::kSafe;
    }
    return detail::PathOutcome::kCensored;
  };

  const auto [ruined, censored] = detail::count_outcomes(cfg.paths, path);
  return detail::summarize(ruined, censored, cfg);
}

// Jump-model simulation under the sqrt(n) scaling; cfg.retention must be
// expressed in the scaled claim coordinates (e.g. the scaled diffusion-optimal
// retention DiffusionOptimal{alpha*, theta/sqrt(n), eta}).
inline SimResult simulate_scaled(const SimConfig& cfg, const ModelParams& p,
                                 const ClaimDistribution& dist, double n,
                                 const QuadratureSpec& spec = {}) {
  const auto s = scale_params(p, dist, n);
  return simulate_classical(cfg, s.params, s.claims, spec);
}

}  // namespace ruinopt
