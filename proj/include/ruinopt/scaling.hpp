#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "ruinopt/classical.hpp"

// Iglehart-type diffusion scaling: claim counts accelerated by n, claim sizes
// and the safety loading shrunk by sqrt(n), premium adjusted so the net drift
// c - lambda mu and the affordability gap kappa stay invariant.  The jump
// model's optimal adjustment coefficient rho_J^(n) then climbs to the
// diffusion rate rho_D at speed 1/sqrt(n), with computable constants.

namespace ruinopt {

struct ScaledModel {
  double n;
  ModelParams params;
  ClaimDistribution claims;
};

inline ScaledModel scale_params(const ModelParams& p, const ClaimDistribution& dist, double n) {
  if (!(n > 0.0)) throw ParamsInvariantViolated("scale index n must be positive");
  const double rn = std::sqrt(n);
  ModelParams q = p;
  q.lambda = n * p.lambda;
  q.theta = p.theta / rn;
  q.c = p.c + (rn - 1.0) * p.lambda * mean(dist);
  return {n, q, scale_claims(dist, 1.0 / rn)};
}

// Any value strictly above (1/3) lambda E(R_D^3) rho_D^2 / (beta^2 + lambda E(R_D^2))
// bounds the gap rho_D - rho_J^(n) by C/sqrt(n) for n large; keep a 1% margin.
inline double constant_C(const DiffusionSolution& sol, const ModelParams& p,
                         const ClaimDistribution& dist) {
  const auto m = retention_moments(dist, RetentionFunction{sol.retention});
  return 1.01 * (p.lambda * m.er3 * sol.rho_D * sol.rho_D) /
         (3.0 * (p.beta * p.beta + p.lambda * m.er2));
}

inline double rho_J_scaled(const ModelParams& p, const ClaimDistribution& dist, double n,
                           const QuadratureSpec& spec = {}) {
  const auto s = scale_params(p, dist, n);
  return solve_rho_J(s.params, s.claims, spec).rho_J;
}

// ---------------------------------------------------------------------------
// Lower-bound constants: delta and N built from the conditional excess
// Z_d = (Y - d) | (Y > d).

namespace detail {

// Grid of d values over which the suprema in the delta/N construction are
// taken.  Exponential claims are memoryless, so d = 0 is exact; empirical
// excesses are extremal at the atoms; otherwise use a geometric grid.
inline std::vector<double> excess_sup_grid(const ClaimDistribution& dist) {
  std::vector<double> g{0.0};
  if (std::holds_alternative<Exponential>(dist)) return g;
  if (const auto* e = std::get_if<EmpiricalFinite>(&dist)) {
    for (std::size_t i = 0; i + 1 < e->atoms.size(); ++i) g.push_back(e->atoms[i]);
    return g;
  }
  const double q = quantile(dist, 1.0 - 1e-10);
  for (int i = 0; i <= 511; ++i) {
    g.push_back(q * std::pow(1e-6, 1.0 - i / 511.0));
  }
  return g;
}

// E e^{s Z_d} - 1 - s E Z_d  (non-negative; the integrand of the N condition).
inline double excess_exp_gap(const ClaimDistribution& dist, double d, double s) {
  const double S = survival(dist, d);
  if (!(S > 0.0)) return 0.0;
  const double ee = std::exp(-s * d) * upper_exp_moment(dist, d, s, 0) / S;
  return ee - 1.0 - s * excess_mean(dist, d);
}

// sup_d E Z_d, with the analytic d -> infinity limit 1/rate appended for
// gamma claims (their excess distribution approaches Exp(rate), from below
// when the shape exceeds 1 and from above when it does not).
inline double sup_excess_mean(const ClaimDistribution& dist) {
  double best = 0.0;
  for (double d : excess_sup_grid(dist)) {
    if (!(survival(dist, d) > 0.0)) continue;
    best = std::max(best, excess_mean(dist, d));
  }
  if (const auto* g = std::get_if<GammaClaims>(&dist)) best = std::max(best, 1.0 / g->rate);
  return best;
}

// Left side of the N condition at scale n.  The inner average over the
// Taylor-remainder weight reduces in closed form:
//   (rho^2/sqrt(n)) Int_0^1 (1-w) E(Z^2 e^{(rho w/sqrt(n)) Z}) dw
//     = sqrt(n) (E e^{sZ} - 1 - s E Z),  s = rho/sqrt(n).
inline double n_condition_lhs(const ClaimDistribution& dist, double rho_D, double n) {
  const double s = rho_D / std::sqrt(n);
  if (!(s < mgf_radius(dist))) return kInf;
  double best = 0.0;
  for (double d : excess_sup_grid(dist)) {
    if (!(survival(dist, d) > 0.0)) continue;
    best = std::max(best, excess_exp_gap(dist, d, s));
  }
  if (const auto* g = std::get_if<GammaClaims>(&dist)) {
    const double nu = g->rate;
    best = std::max(best, nu / (nu - s) - 1.0 - s / nu);
  }
  return std::sqrt(n) * best;
}

}  // namespace detail

struct ScalingConstants {
  double C;      // upper sandwich: rho_J^(n) > rho_D - C/sqrt(n)
  double delta;  // lower bound factor: (1 - delta/sqrt(n)) psi_D <= psi^(n)
  double m;      // smallest integer with rho_D/sqrt(m) < (MGF radius)/2
  double N;      // bounds guaranteed for n > N
  double eps;    // slack used inside delta and the N condition
};

inline ScalingConstants delta_and_N(const DiffusionSolution& sol, const ModelParams& p,
                                    const ClaimDistribution& dist, double eps = 1e-3) {
  ScalingConstants k{};
  k.eps = eps;
  k.C = constant_C(sol, p, dist);

  const double rinf = mgf_radius(dist);
  double m = 1.0;
  if (std::isfinite(rinf)) {
    while (!(sol.rho_D / std::sqrt(m) < 0.5 * rinf)) {
      m *= 2.0;
      if (m > 1e18) throw ConditionViolated("claim MGF radius too small for the scaling bounds");
    }
    if (m > 1.0) {
      double lo = m / 2.0, hi = m;  // lo fails the condition, hi satisfies it
      while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        (sol.rho_D / std::sqrt(mid) < 0.5 * rinf ? hi : lo) = mid;
      }
      m = hi;
    }
  }
  k.m = m;

  // The square-exponential excess moment must be finite at rho_D/sqrt(m).
  const double s_m = sol.rho_D / std::sqrt(m);
  if (!std::isfinite(excess_square_exp(dist, 0.0, s_m))) {
    throw ConditionViolated("square-exponential excess moment diverges at rho_D/sqrt(m)");
  }

  k.delta = sol.rho_D * detail::sup_excess_mean(dist) + eps;

  const double n0 = std::floor(std::max(k.delta * k.delta, m)) + 1.0;
  double n = n0;
  while (detail::n_condition_lhs(dist, sol.rho_D, n) > eps) {
    n *= 2.0;
    if (n > 1e15) throw ConditionViolated("remainder bound never drops below eps");
  }
  if (n > n0) {
    double lo = n / 2.0, hi = n;  // left side decreases in n: bisect for the smallest
    while (hi - lo > 1.0) {
      const double mid = std::floor(0.5 * (lo + hi));
      (detail::n_condition_lhs(dist, sol.rho_D, mid) <= eps ? hi : lo) = mid;
    }
    n = hi;
  }
  k.N = n;
  return k;
}

// ---------------------------------------------------------------------------

struct PsiBounds {
  double lower;         // (1 - delta/sqrt(n)) e^{-rho_D x}
  double upper;         // e^{-(rho_D - C/sqrt(n)) x}
  double lundberg;      // tighter upper bound e^{-rho_J^(n) x}
  bool pre_asymptotic;  // n <= N: bounds reported but not guaranteed
};

inline PsiBounds psi_bounds(const DiffusionSolution& sol, double rho_J_n,
                            const ScalingConstants& k, double n, double x) {
  PsiBounds b{};
  b.pre_asymptotic = !(n > k.N);
  if (x <= 0.0) {
    const double rn = std::sqrt(n);
    b.lower = std::max(0.0, 1.0 - k.delta / rn);
    b.upper = 1.0;
    b.lundberg = 1.0;
    return b;
  }
  const double rn = std::sqrt(n);
  b.lower = std::max(0.0, (1.0 - k.delta / rn) * std::exp(-sol.rho_D * x));
  b.upper = std::min(1.0, std::exp(-(sol.rho_D - k.C / rn) * x));
  b.lundberg = std::min(1.0, std::exp(-rho_J_n * x));
  return b;
}

// sup-grid deviation of sqrt(n) hRJ^(n)(y/sqrt(n)) from R_D(y), one per n.
inline std::vector<double> retention_convergence(const ModelParams& p,
                                                 const ClaimDistribution& dist,
                                                 const std::vector<double>& n_list,
                                                 const std::vector<double>& y_grid,
                                                 const QuadratureSpec& spec = {}) {
  const auto sol = solve_alpha_star(p, dist);
  const RetentionFunction rd{sol.retention};
  std::vector<double> devs;
  devs.reserve(n_list.size());
  for (double n : n_list) {
    const auto s = scale_params(p, dist, n);
    const auto jn = solve_rho_J(s.params, s.claims, spec);
    const RetentionFunction hn{jn.retention};
    const double rn = std::sqrt(n);
    double dev = 0.0;
    for (double y : y_grid) {
      dev = std::max(dev, std::abs(rn * retained(hn, y / rn) - retained(rd, y)));
    }
    devs.push_back(dev);
  }
  return devs;
}

struct ScalingRecord {
  double n;
  double rho_J_n;
  double lower;  // rho_D - C/sqrt(n)
  double upper;  // rho_D
  double retention_dev;
  bool pre_asymptotic;
};

struct ConvergenceReport {
  double rho_D;
  ScalingConstants constants;
  std::vector<ScalingRecord> records;
};

inline ConvergenceReport convergence_report(const ModelParams& p, const ClaimDistribution& dist,
                                            const std::vector<double>& n_list,
                                            double eps = 1e-3,
                                            const QuadratureSpec& spec = {}) {
  const auto sol = solve_alpha_star(p, dist);
  ConvergenceReport rep;
  rep.rho_D = sol.rho_D;
  rep.constants = delta_and_N(sol, p, dist, eps);

  const double ycap = quantile(dist, 1.0 - 1e-8);
  std::vector<double> y_grid;
  for (int i = 0; i <= 100; ++i) y_grid.push_back(ycap * i / 100.0);

  const RetentionFunction rd{sol.retention};
  for (double n : n_list) {
    const auto s = scale_params(p, dist, n);
    const auto jn = solve_rho_J(s.params, s.claims, spec);
    const RetentionFunction hn{jn.retention};
    const double rn = std::sqrt(n);
    double dev = 0.0;
    for (double y : y_grid) {
      dev = std::max(dev, std::abs(rn * retained(hn, y / rn) - retained(rd, y)));
    }
    ScalingRecord rec{};
    rec.n = n;
    rec.rho_J_n = jn.rho_J;
    rec.lower = sol.rho_D - rep.constants.C / rn;
    rec.upper = sol.rho_D;
    rec.retention_dev = dev;
    rec.pre_asymptotic = !(n > rep.constants.N);
    rep.records.push_back(rec);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Analytic envelope for the unscaled jump model: e^{-rho_J x} is a
// stochastic supersolution (upper bound on psi) and e^{-gamma x} with
// gamma = 2c/beta^2 a stochastic subsolution (lower bound).

struct AppendixBounds {
  double supersolution;
  double subsolution;
};

inline AppendixBounds appendix_bounds(const ModelParams& p, double rho_J, double x) {
  if (x <= 0.0) return {1.0, 1.0};
  const double gamma = 2.0 * p.c / (p.beta * p.beta);
  return {std::exp(-rho_J * x), std::exp(-gamma * x)};
}

}  // namespace ruinopt
