#pragma once

#include <cmath>

#include "ruinopt/model.hpp"

// Diffusion-approximation solver: the minimal ruin probability of the
// approximating controlled diffusion is exp(-rho_D x) with rho_D = alpha*-eta,
// where alpha* is the unique root above eta of the scalar function G below,
// and the optimal retention is R_D(y) = (theta + eta y)/alpha* ^ y.

namespace ruinopt {

struct GMoments {
  double g1;  // E R_D(Y; alpha)
  double g2;  // E[Y R_D]
  double g3;  // E[R_D^2]
};

inline GMoments g_moments(double alpha, const ModelParams& p, const ClaimDistribution& dist) {
  const auto m = retention_moments(dist, DiffusionOptimal{alpha, p.theta, p.eta});
  return {m.er, m.eyr, m.er2};
}

// G(alpha) = theta g1 + eta g2 - (alpha/2) g3 - [beta^2 (alpha-eta) + 2 kappa]/(2 lambda);
// strictly decreasing on (eta, inf) with G(eta) = (c - lambda mu)/lambda > 0.
inline double diffusion_G(double alpha, const ModelParams& p, const ClaimDistribution& dist) {
  const auto g = g_moments(alpha, p, dist);
  return p.theta * g.g1 + p.eta * g.g2 - 0.5 * alpha * g.g3 -
         (p.beta * p.beta * (alpha - p.eta) + 2.0 * kappa(p, dist)) / (2.0 * p.lambda);
}

// Residual of the defining equation in its published form,
//   c - lambda mu = (alpha - eta) { lambda /int_0^inf R_D(y) S_Y(y) dy + beta^2/2 }.
inline double diffusion_equation_residual(double alpha, const ModelParams& p,
                                          const ClaimDistribution& dist) {
  double integral;  // /int_0^inf R_D(y; alpha) S_Y(y) dy
  if (alpha <= p.eta) {
    integral = tail_power_integral(dist, 0.0, 1);
  } else {
    const double k = p.theta / (alpha - p.eta);
    const double t0 = tail_power_integral(dist, k, 0);
    const double t1 = tail_power_integral(dist, k, 1);
    const double below = 0.5 * second_moment(dist) - t1;  // /int_0^k y S dy
    integral = below + (p.theta * t0 + p.eta * t1) / alpha;
  }
  return (p.c - p.lambda * mean(dist)) -
         (alpha - p.eta) * (p.lambda * integral + 0.5 * p.beta * p.beta);
}

struct DiffusionSolution {
  double alpha_star;
  double rho_D;
  DiffusionOptimal retention;
  double residual;    // of the defining equation at alpha*
  int iterations;
};

inline DiffusionSolution solve_alpha_star(const ModelParams& p, const ClaimDistribution& dist) {
  validate(p, dist);
  // Entry check: G(eta) must equal the positive constant (c - lambda mu)/lambda.
  const double safety = (p.c - p.lambda * mean(dist)) / p.lambda;
  const double at_eta = diffusion_G(p.eta, p, dist);
  if (!(at_eta > 0.0) || std::abs(at_eta - safety) > 1e-9 * std::max(1.0, safety)) {
    throw ParamsInvariantViolated("safety-loading identity G(eta) = (c - lambda mu)/lambda failed");
  }

  RootSpec rs;
  rs.lo = p.eta;  // G(eta) > 0 proven above
  rs.hi = p.eta + 1.0;
  rs.expand_hi = true;   // G -> -inf linearly, so a sign change always appears
  rs.max_expand = 200;
  rs.root_tol = 1e-13 * std::max(1.0, p.eta);
  rs.residual_tol = 1e-10 * std::max(1.0, safety);
  const auto root = find_root_monotone([&](double a) { return diffusion_G(a, p, dist); }, rs);

  DiffusionSolution sol;
  sol.alpha_star = root.root;
  sol.rho_D = root.root - p.eta;
  sol.retention = DiffusionOptimal{root.root, p.theta, p.eta};
  sol.residual = diffusion_equation_residual(root.root, p, dist);
  sol.iterations = root.iterations;
  return sol;
}

inline double retention_RD(const DiffusionSolution& sol, double y) {
  return retained(RetentionFunction{sol.retention}, y);
}

inline double psi_D(const DiffusionSolution& sol, double x) {
  return x <= 0.0 ? 1.0 : std::exp(-sol.rho_D * x);
}

// Adjustment coefficient of the diffusion approximation under a fixed
// retention: 2 * drift / (lambda E[R^2] + beta^2).
inline double rho_D_of_R(const ModelParams& p, const ClaimDistribution& dist,
                         const RetentionFunction& ret, const QuadratureSpec& spec = {}) {
  const auto m = retention_moments(dist, ret, 0.0, spec);
  const double drift = -kappa(p, dist) +
                       p.lambda * (p.theta * m.er + p.eta * m.eyr - 0.5 * p.eta * m.er2);
  if (!(drift > 0.0)) {
    throw NetProfitViolated("net-profit condition fails for this retention");
  }
  return 2.0 * drift / (p.lambda * m.er2 + p.beta * p.beta);
}

// ---------------------------------------------------------------------------
// Special case eta = 0: the optimal retention is a pure deductible theta/alpha*.

struct DeductibleSolution {
  double alpha_star;
  double deductible;
};

inline DeductibleSolution eta0_deductible(const ModelParams& p, const ClaimDistribution& dist) {
  if (p.eta != 0.0) throw ParamsInvariantViolated("deductible special case requires eta = 0");
  validate(p, dist);
  const double mu = mean(dist);
  const double m2 = second_moment(dist);
  // F(alpha) = (1+theta) lambda mu - c + beta^2 alpha / 2
  //            - lambda /int_0^{theta/alpha} (theta - alpha y) S_Y dy,
  // strictly increasing with F(0+) = lambda mu - c < 0.
  auto F = [&](double a) {
    const double k = p.theta / a;
    const double t0 = tail_power_integral(dist, k, 0);
    const double t1 = tail_power_integral(dist, k, 1);
    const double integral = p.theta * (mu - t0) - a * (0.5 * m2 - t1);
    return (1.0 + p.theta) * p.lambda * mu - p.c + 0.5 * p.beta * p.beta * a -
           p.lambda * integral;
  };
  RootSpec rs;
  rs.lo = 1e-300;
  rs.hi = 1.0;
  rs.expand_hi = true;
  rs.max_expand = 200;
  rs.root_tol = 1e-13;
  rs.residual_tol = 1e-10 * std::max(1.0, p.c);
  const double a = find_root_monotone(F, rs).root;
  return {a, p.theta / a};
}

// ---------------------------------------------------------------------------
// Special case theta = 0: closed-form alpha* and a proportional retention
// with quota eta/alpha*.

inline double tet0_alpha(const ModelParams& p, const ClaimDistribution& dist) {
  if (p.theta != 0.0) throw ParamsInvariantViolated("closed form requires theta = 0");
  validate(p, dist);
  const double m2 = second_moment(dist);
  const double eta0 = 2.0 * (p.c - p.lambda * mean(dist)) / (p.lambda * m2);
  if (!(eta0 > 0.0 && eta0 < p.eta)) {
    throw ParamsInvariantViolated(
        "implied variance loading must satisfy 0 < 2(c - lambda mu)/(lambda E[Y^2]) < eta");
  }
  const double b2 = p.beta * p.beta;
  const double A = p.eta * b2 - (p.eta - eta0) * p.lambda * m2;
  return (A + std::sqrt(A * A + 4.0 * p.eta * p.eta * b2 * p.lambda * m2)) / (2.0 * b2);
}

}  // namespace ruinopt
