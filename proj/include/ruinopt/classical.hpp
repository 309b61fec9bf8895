#pragma once

#include <cmath>

#include "ruinopt/diffusion.hpp"
#include "ruinopt/model.hpp"

// Classical (jump) model: maximize the adjustment coefficient rho over
// retentions.  The optimal retention keeps claims below ln(1+theta)/rho and
// above that level retains R_c(rho, y), the root of
//   e^{rho R} = 1 + theta + eta (y - R).

namespace ruinopt {

// Inner solve, public form: requires y at or above the identity threshold.
inline double solve_Rc(double r, double theta, double eta, double y) {
  const double thr = std::log1p(theta) / r;
  if (y < thr - 1e-12 * std::max(1.0, thr)) {
    throw ThresholdViolation("claim size below the identity threshold ln(1+theta)/r");
  }
  return detail::rc_root(r, theta, eta, std::max(y, thr));
}

inline double retention_hRJ(double r, double theta, double eta, double y) {
  return retained(RetentionFunction{ClassicalOptimal{r, theta, eta}}, y);
}

// Curvilinear upper asymptote of the optimal retention.
inline double asymptote_g(double rho, double theta, double eta, double y) {
  return std::log1p(theta + eta * y) / rho;
}

// ---------------------------------------------------------------------------
// The Lundberg functional of a fixed retention:
//   j(r) = (c - premium(R)) r - beta^2 r^2 / 2 - lambda (E e^{r R} - 1),
// concave with j(0) = 0 and j'(0) = net drift.
inline double classical_j(const ModelParams& p, const ClaimDistribution& dist,
                          const RetentionFunction& ret, double r,
                          const QuadratureSpec& spec = {}) {
  const auto m = retention_moments(dist, ret, r, spec);
  const double drift = -kappa(p, dist) + p.lambda * ((1.0 + p.theta) * m.er + p.eta * m.eyr -
                                                     0.5 * p.eta * m.er2);
  return drift * r - 0.5 * p.beta * p.beta * r * r - p.lambda * (m.eexp - 1.0);
}

// Unique positive root of j for a fixed retention.
inline double adjustment_for_retention(const ModelParams& p, const ClaimDistribution& dist,
                                       const RetentionFunction& ret,
                                       const QuadratureSpec& spec = {}) {
  if (!net_profit_holds(p, dist, ret, spec)) {
    throw NetProfitViolated("net-profit condition fails: j has no positive root");
  }
  auto j = [&](double r) { return classical_j(p, dist, ret, r, spec); };

  // The exponential moment in j exists for r * slope < claim MGF radius.
  const double slope = retention_growth_slope(ret);
  const double rmax = slope > 0.0 ? mgf_radius(dist) / slope : kInf;

  double hi = 0.0;
  if (std::isfinite(rmax)) {
    // Probe toward the MGF boundary; j may stay positive all the way up,
    // in which case no adjustment coefficient exists.
    for (int k = 1; k <= 12; ++k) {
      const double probe = rmax * (1.0 - std::pow(10.0, -k));
      if (j(probe) < 0.0) {
        hi = probe;
        break;
      }
    }
    if (hi == 0.0) {
      throw AdjustmentNotFound("Lundberg function stays positive up to the MGF radius");
    }
  } else {
    hi = 1.0;
    int guard = 0;
    while (j(hi) >= 0.0) {
      hi *= 2.0;
      if (++guard > 200) throw AdjustmentNotFound("Lundberg function never turns negative");
    }
  }

  RootSpec rs;
  rs.lo = 1e-12;
  rs.hi = hi;
  rs.expand_lo = true;  // in case j(1e-12) is already negative at extreme params
  rs.root_tol = 1e-13;
  rs.residual_tol = 1e-10 * std::max(1.0, p.c);
  return find_root_monotone(j, rs).root;
}

// ---------------------------------------------------------------------------
// Outer solve for the maximal adjustment coefficient.

namespace detail {

// Proof-form outer function: strictly decreasing in r with
// G(0+) = c - lambda mu > 0 and G(rho_D) < 0,
//   G(r) = lambda /int_0^thr (1+theta+eta y - e^{ry}) S dy
//        + lambda eta /int_thr^inf R_c(r, y) S dy - kappa - beta^2 r / 2.
inline double classical_G(double r, const ModelParams& p, const ClaimDistribution& dist,
                          const QuadratureSpec& spec) {
  const double thr = std::log1p(p.theta) / r;
  const double T = truncation_point(dist, spec.survival_cut);
  const auto breaks = quadrature_breakpoints(dist);

  auto S = [&](double y) { return survival(dist, y); };

  // Identity region: /int_0^{min(thr, T)} (1+theta+eta y - e^{ry}) S dy.
  const double a = std::min(thr, T);
  double I1 = integrate(
      [&](double y) { return ((1.0 + p.theta) + p.eta * y - std::exp(r * y)) * S(y); }, 0.0, a,
      spec, breaks);
  if (thr > T) {
    // Close the remaining stretch [T, thr] analytically.
    I1 += (1.0 + p.theta) * (tail_power_integral(dist, T, 0) - tail_power_integral(dist, thr, 0));
    I1 += p.eta * (tail_power_integral(dist, T, 1) - tail_power_integral(dist, thr, 1));
    I1 -= tail_exp_integral(dist, T, r) - tail_exp_integral(dist, thr, r);
  }

  // Constrained region: lambda eta /int_thr^inf R_c S dy.
  double I2 = 0.0;
  if (p.eta > 0.0) {
    const double u = std::max(thr, T);
    if (T > thr) {
      I2 += integrate([&](double y) { return rc_root(r, p.theta, p.eta, y) * S(y); }, thr, T,
                      spec, breaks);
    }
    // Tail beyond u: R_c hugs its asymptote g(y) = log1p(theta+eta y)/r from
    // below with vanishing gap, so integrate the tangent of g at u.
    const double g = std::log1p(p.theta + p.eta * u) / r;
    const double gp = p.eta / (r * (1.0 + p.theta + p.eta * u));
    const double t0 = tail_power_integral(dist, u, 0);
    const double t1 = tail_power_integral(dist, u, 1);
    I2 += g * t0 + gp * (t1 - u * t0);
  }

  return p.lambda * (I1 + p.eta * I2) - kappa(p, dist) - 0.5 * p.beta * p.beta * r;
}

}  // namespace detail

struct AdjustmentSolution {
  double rho_J;
  ClassicalOptimal retention;
  double threshold;  // ln(1+theta)/rho_J
  double rho_D;      // proven upper bound used for the outer bracket
  double residual;   // of the published fixed-point equation at rho_J
  int iterations;
};

// Residual of the published equation
//   c - lambda mu = lambda /int_0^inf (e^{r hRJ(y)} - 1) S dy + beta^2 r / 2,
// evaluated through the retention itself (independent of the solver form).
inline double classical_equation_residual(double rho, const ModelParams& p,
                                          const ClaimDistribution& dist,
                                          const QuadratureSpec& spec = {}) {
  const RetentionFunction hRJ = ClassicalOptimal{rho, p.theta, p.eta};
  const double thr = std::log1p(p.theta) / rho;
  const double T = truncation_point(dist, spec.survival_cut);
  auto breaks = quadrature_breakpoints(dist);
  breaks.push_back(thr);

  double I = integrate(
      [&](double y) { return std::expm1(rho * retained(hRJ, y)) * survival(dist, y); }, 0.0,
      std::max(T, thr), spec, breaks);
  // Beyond the truncation point e^{r R_c} - 1 = theta + eta (y - R_c) with
  // R_c approximated by its asymptote's tangent.
  const double u = std::max(T, thr);
  const double g = std::log1p(p.theta + p.eta * u) / rho;
  const double gp = p.eta / (rho * (1.0 + p.theta + p.eta * u));
  const double t0 = tail_power_integral(dist, u, 0);
  const double t1 = tail_power_integral(dist, u, 1);
  I += p.theta * t0 + p.eta * t1 - p.eta * (g * t0 + gp * (t1 - u * t0));

  return (p.c - p.lambda * mean(dist)) - p.lambda * I - 0.5 * p.beta * p.beta * rho;
}

inline AdjustmentSolution solve_rho_J(const ModelParams& p, const ClaimDistribution& dist,
                                      const QuadratureSpec& spec = {}) {
  validate(p, dist);
  const auto diff = solve_alpha_star(p, dist);

  auto G = [&](double r) { return detail::classical_G(r, p, dist, spec); };

  RootSpec rs;
  rs.lo = 1e-8;
  rs.hi = diff.rho_D;  // strict upper bound for the jump model's coefficient
  rs.expand_lo = true;
  rs.root_tol = 1e-13;
  rs.residual_tol = 1e-9 * std::max(1.0, p.c);
  const auto root = find_root_monotone(G, rs);

  AdjustmentSolution sol;
  sol.rho_J = root.root;
  sol.retention = ClassicalOptimal{root.root, p.theta, p.eta};
  sol.threshold = std::log1p(p.theta) / root.root;
  sol.rho_D = diff.rho_D;
  sol.residual = classical_equation_residual(root.root, p, dist, spec);
  sol.iterations = root.iterations;
  return sol;
}

// ---------------------------------------------------------------------------
// Special case eta = 0: optimal retention is the deductible ln(1+theta)/rho_J.

struct ClassicalDeductible {
  double rho_J;
  double deductible;
};

inline ClassicalDeductible eta0_classical(const ModelParams& p, const ClaimDistribution& dist,
                                          const QuadratureSpec& spec = {}) {
  if (p.eta != 0.0) throw ParamsInvariantViolated("deductible special case requires eta = 0");
  validate(p, dist);
  // F(r) = (1+theta) lambda mu - c + beta^2 r / 2
  //        - lambda /int_0^{ln(1+theta)/r} (1 + theta - e^{ry}) S dy,
  // strictly increasing with F(0+) = lambda mu - c < 0.
  const double T = truncation_point(dist, spec.survival_cut);
  const auto breaks = quadrature_breakpoints(dist);
  auto F = [&](double r) {
    const double thr = std::log1p(p.theta) / r;
    const double a = std::min(thr, T);
    double I = integrate(
        [&](double y) { return ((1.0 + p.theta) - std::exp(r * y)) * survival(dist, y); }, 0.0,
        a, spec, breaks);
    if (thr > T) {
      I += (1.0 + p.theta) *
           (tail_power_integral(dist, T, 0) - tail_power_integral(dist, thr, 0));
      I -= tail_exp_integral(dist, T, r) - tail_exp_integral(dist, thr, r);
    }
    return (1.0 + p.theta) * p.lambda * mean(dist) - p.c + 0.5 * p.beta * p.beta * r -
           p.lambda * I;
  };
  RootSpec rs;
  rs.lo = 1e-8;
  rs.hi = 1.0;
  rs.expand_lo = true;
  rs.expand_hi = true;
  rs.root_tol = 1e-13;
  rs.residual_tol = 1e-9 * std::max(1.0, p.c);
  const double r = find_root_monotone(F, rs).root;
  return {r, std::log1p(p.theta) / r};
}

// ---------------------------------------------------------------------------
// Special case theta = 0: the classical and diffusion retentions cross
// exactly once; below y0 the jump model retains more, above it less.

inline double tet0_crossing(const ModelParams& p, const ClaimDistribution& dist) {
  if (p.theta != 0.0) throw ParamsInvariantViolated("crossing point requires theta = 0");
  const auto jump = solve_rho_J(p, dist);
  const double alpha = jump.rho_D + p.eta;  // alpha* of the diffusion problem
  auto difff = [&](double y) {
    return detail::rc_root(jump.rho_J, 0.0, p.eta, y) - (p.eta / alpha) * y;
  };
  // Positive near 0 (steeper initial slope), negative for large y
  // (logarithmic vs linear growth); scan geometrically for the sign change.
  const double cap = quantile(dist, 1.0 - 1e-12);
  double lo = 1e-6;
  if (difff(lo) <= 0.0) {
    throw NumericalFailure("retention difference not positive near the origin");
  }
  double hi = lo;
  while (difff(hi) > 0.0) {
    hi *= 2.0;
    if (hi > cap) {
      throw NumericalFailure("no retention crossing below the far claim quantile");
    }
  }
  RootSpec rs;
  rs.lo = hi / 2.0;
  rs.hi = hi;
  rs.root_tol = 1e-12;
  rs.residual_tol = 1e-9;
  return find_root_monotone(difff, rs).root;
}

}  // namespace ruinopt
