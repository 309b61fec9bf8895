#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ruinopt/distributions.hpp"
#include "ruinopt/errors.hpp"
#include "ruinopt/numerics.hpp"
#include "ruinopt/retention.hpp"

// Model parameters and the moment functionals that every solver consumes.
//
// Surplus between claims drifts at c - premium(R); claims arrive at rate
// lambda and cost the insurer R(Y) each; a Brownian perturbation with
// volatility beta is superimposed.  The reinsurance premium follows the
// mean-variance principle
//   premium(R) = (1+theta) lambda E[Y-R] + (eta/2) lambda E[(Y-R)^2].

namespace ruinopt {

struct ModelParams {
  double lambda;  // claim arrival intensity
  double c;       // gross premium income rate
  double theta;   // proportional loading of the reinsurer
  double eta;     // variance loading of the reinsurer
  double beta;    // diffusion volatility
};

// kappa = (1+theta) lambda mu + (eta/2) lambda E[Y^2] - c; the model requires
// it to be strictly positive (otherwise ceding everything is affordable and
// ruin is trivially avoidable).
inline double kappa(const ModelParams& p, const ClaimDistribution& dist) {
  const double k =
      (1.0 + p.theta) * p.lambda * mean(dist) + 0.5 * p.eta * p.lambda * second_moment(dist) -
      p.c;
  if (!(k > 0.0)) {
    throw ParamsInvariantViolated(
        "full reinsurance must be unaffordable: c < (1+theta)*lambda*E[Y] + "
        "(eta/2)*lambda*E[Y^2] violated");
  }
  return k;
}

inline void validate(const ModelParams& p, const ClaimDistribution& dist) {
  validate(dist);
  if (!(p.lambda > 0.0 && std::isfinite(p.lambda)))
    throw ParamsInvariantViolated("claim intensity must be positive: lambda > 0 violated");
  if (!(p.beta > 0.0 && std::isfinite(p.beta)))
    throw ParamsInvariantViolated("diffusion volatility must be positive: beta > 0 violated");
  if (!(p.theta >= 0.0 && p.eta >= 0.0))
    throw ParamsInvariantViolated("premium loadings must be non-negative: theta, eta >= 0 violated");
  if (!(p.theta + p.eta > 0.0))
    throw ParamsInvariantViolated("premium must carry a loading: theta + eta > 0 violated");
  if (!(std::isfinite(p.c) && p.c > p.lambda * mean(dist)))
    throw ParamsInvariantViolated(
        "premium income must exceed the expected claim outflow: c > lambda*E[Y] violated");
  kappa(p, dist);  // throws when the upper premium inequality fails
}

// ---------------------------------------------------------------------------
// Moment functionals of a retention under the claim distribution.

struct RetentionMoments {
  double er;    // E R(Y)
  double eyr;   // E[Y R(Y)]
  double er2;   // E[R(Y)^2]
  double er3;   // E[R(Y)^3]
  double eexp;  // E[e^{r R(Y)}] for the requested exponent r
};

namespace detail {

inline RetentionMoments moments_via_survival_form(const ClaimDistribution& dist,
                                                  const RetentionFunction& ret, double r,
                                                  const QuadratureSpec& spec) {
  // E h(R(Y)) = h(R(0)) + /int_0^infty (h o R)'(y) S_Y(y) dy for non-
  // decreasing R with R(0) = 0; integrate to the survival cut and close the
  // remainder with the (possibly linearized) affine tail of R.
  const double T = truncation_point(dist, spec.survival_cut);
  std::vector<double> breaks = quadrature_breakpoints(dist);
  for (double k : retention_kinks(ret)) {
    if (k < T) breaks.push_back(k);
  }

  auto S = [&](double y) { return survival(dist, y); };
  auto R = [&](double y) { return retained(ret, y); };
  auto Rp = [&](double y) { return retained_slope(ret, y); };

  RetentionMoments m{};
  m.er = integrate([&](double y) { return Rp(y) * S(y); }, 0.0, T, spec, breaks);
  m.eyr = integrate([&](double y) { return (R(y) + y * Rp(y)) * S(y); }, 0.0, T, spec, breaks);
  m.er2 = integrate([&](double y) { return 2.0 * R(y) * Rp(y) * S(y); }, 0.0, T, spec, breaks);
  m.er3 =
      integrate([&](double y) { return 3.0 * R(y) * R(y) * Rp(y) * S(y); }, 0.0, T, spec, breaks);
  m.eexp = 1.0 + r * integrate([&](double y) { return Rp(y) * std::exp(r * R(y)) * S(y); }, 0.0,
                               T, spec, breaks);

  // Tail beyond T: exact affine description when the variant has one,
  // otherwise the tangent at T (the discarded curvature acts on survival
  // mass below the cut, i.e. is negligible by construction).
  double a, b;
  if (const auto tail = affine_tail(ret); tail && tail->start <= T) {
    a = tail->offset;
    b = tail->slope;
  } else {
    b = Rp(T);
    a = R(T) - b * T;
  }
  const double t0 = tail_power_integral(dist, T, 0);
  const double t1 = tail_power_integral(dist, T, 1);
  const double t2 = tail_power_integral(dist, T, 2);
  m.er += b * t0;
  m.eyr += a * t0 + 2.0 * b * t1;
  m.er2 += 2.0 * b * (a * t0 + b * t1);
  m.er3 += 3.0 * b * (a * a * t0 + 2.0 * a * b * t1 + b * b * t2);
  if (r != 0.0 && b != 0.0) {
    m.eexp += r * b * std::exp(r * a) * tail_exp_integral(dist, T, r * b);
  }
  return m;
}

inline RetentionMoments moments_exact_sums(const EmpiricalFinite& d, const RetentionFunction& ret,
                                           double r) {
  RetentionMoments m{};
  m.eexp = 0.0;
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    const double y = d.atoms[i];
    const double w = d.weights[i];
    const double R = retained(ret, y);
    m.er += w * R;
    m.eyr += w * y * R;
    m.er2 += w * R * R;
    m.er3 += w * R * R * R;
    m.eexp += w * std::exp(r * R);
  }
  return m;
}

}  // namespace detail

inline RetentionMoments retention_moments(const ClaimDistribution& dist,
                                          const RetentionFunction& ret, double r = 0.0,
                                          const QuadratureSpec& spec = {}) {
  // Guard the exponential moment: it exists iff r * growth-slope stays below
  // the MGF radius of the claims.
  if (r > 0.0) {
    const double slope = retention_growth_slope(ret);
    if (slope > 0.0 && !(r * slope < mgf_radius(dist))) {
      throw MgfDomainExceeded("exponential retention moment outside the MGF domain");
    }
  }

  if (const auto* emp = std::get_if<EmpiricalFinite>(&dist)) {
    return detail::moments_exact_sums(*emp, ret, r);
  }

  const double mu = mean(dist);
  const double m2 = second_moment(dist);
  const double m3 = third_moment(dist);

  if (std::holds_alternative<Full>(ret)) {
    return {mu, m2, m2, m3, mgf(dist, r)};
  }
  if (std::holds_alternative<Zero>(ret)) {
    return {0.0, 0.0, 0.0, 0.0, 1.0};
  }
  if (const auto* q = std::get_if<QuotaShare>(&ret)) {
    const double p = q->proportion;
    return {p * mu, p * m2, p * p * m2, p * p * p * m3,
            p == 0.0 ? 1.0 : mgf(dist, r * p)};
  }
  if (const auto* sl = std::get_if<StopLoss>(&ret)) {
    const double M = sl->deductible;
    const double sM = survival(dist, M);
    RetentionMoments m{};
    m.er = mu - tail_power_integral(dist, M, 0);
    m.er2 = m2 - 2.0 * tail_power_integral(dist, M, 1);
    m.er3 = m3 - 3.0 * tail_power_integral(dist, M, 2);
    m.eyr = (m2 - upper_exp_moment(dist, M, 0.0, 2)) + M * upper_exp_moment(dist, M, 0.0, 1);
    m.eexp = lower_exp_moment(dist, M, r, spec) + std::exp(r * M) * sM;
    return m;
  }
  if (const auto* d = std::get_if<DiffusionOptimal>(&ret)) {
    if (d->alpha <= d->eta) {
      return {mu, m2, m2, m3, mgf(dist, r)};
    }
    const double k = d->theta / (d->alpha - d->eta);
    const double a = d->alpha;
    const double th = d->theta;
    const double et = d->eta;
    const double sk = survival(dist, k);
    const double u1 = upper_exp_moment(dist, k, 0.0, 1);
    const double u2 = upper_exp_moment(dist, k, 0.0, 2);
    const double u3 = upper_exp_moment(dist, k, 0.0, 3);
    RetentionMoments m{};
    m.er = (mu - u1) + (th * sk + et * u1) / a;
    m.eyr = (m2 - u2) + (th * u1 + et * u2) / a;
    m.er2 = (m2 - u2) + (th * th * sk + 2.0 * th * et * u1 + et * et * u2) / (a * a);
    m.er3 = (m3 - u3) +
            (th * th * th * sk + 3.0 * th * th * et * u1 + 3.0 * th * et * et * u2 +
             et * et * et * u3) /
                (a * a * a);
    m.eexp = lower_exp_moment(dist, k, r, spec) +
             std::exp(r * th / a) * upper_exp_moment(dist, k, r * et / a, 0);
    return m;
  }
  return detail::moments_via_survival_form(dist, ret, r, spec);
}

// ---------------------------------------------------------------------------
// Premium, drift, net-profit condition.

// Premium rate ceded to the reinsurer for retention R.
inline double premium_rate(const ModelParams& p, const ClaimDistribution& dist,
                           const RetentionFunction& ret, const QuadratureSpec& spec = {}) {
  const auto m = retention_moments(dist, ret, 0.0, spec);
  const double ceded_mean = mean(dist) - m.er;
  const double ceded_square = second_moment(dist) - 2.0 * m.eyr + m.er2;
  const double rate =
      (1.0 + p.theta) * p.lambda * ceded_mean + 0.5 * p.eta * p.lambda * ceded_square;
  if (!std::isfinite(rate)) throw DistributionUnsupported("premium integrals do not converge");
  return rate;
}

// Drift of the controlled surplus between claims: c - premium(R).
inline double surplus_drift(const ModelParams& p, const ClaimDistribution& dist,
                            const RetentionFunction& ret, const QuadratureSpec& spec = {}) {
  const auto m = retention_moments(dist, ret, 0.0, spec);
  return -kappa(p, dist) + p.lambda * ((1.0 + p.theta) * m.er + p.eta * m.eyr -
                                       0.5 * p.eta * m.er2);
}

// Mean surplus growth rate: c - premium(R) - lambda E[R].
inline double net_drift(const ModelParams& p, const ClaimDistribution& dist,
                        const RetentionFunction& ret, const QuadratureSpec& spec = {}) {
  const auto m = retention_moments(dist, ret, 0.0, spec);
  return -kappa(p, dist) +
         p.lambda * (p.theta * m.er + p.eta * m.eyr - 0.5 * p.eta * m.er2);
}

inline bool net_profit_holds(const ModelParams& p, const ClaimDistribution& dist,
                             const RetentionFunction& ret, const QuadratureSpec& spec = {}) {
  return net_drift(p, dist, ret, spec) > 0.0;
}

// ---------------------------------------------------------------------------
// Admissibility bounds for the two classic families.

// Smallest proportion q1 such that QuotaShare(q) satisfies the net-profit
// condition for every q in (q1, 1].
inline double admissible_quota_bound(const ModelParams& p, const ClaimDistribution& dist) {
  const double k = kappa(p, dist);
  const double mu = mean(dist);
  const double m2 = second_moment(dist);
  if (p.eta == 0.0) {
    return k / (p.lambda * p.theta * mu);
  }
  const double A = p.eta * m2 + p.theta * mu;
  const double disc = A * A - 2.0 * p.eta * m2 * k / p.lambda;
  if (disc < 0.0) {
    throw NoAdmissibleQuota("no quota-share retention satisfies the net-profit condition");
  }
  return (A - std::sqrt(disc)) / (p.eta * m2);
}

// Smallest deductible M1 such that StopLoss(M) satisfies the net-profit
// condition for every M > M1.
inline double admissible_stoploss_bound(const ModelParams& p, const ClaimDistribution& dist) {
  kappa(p, dist);
  const double target = p.c - p.lambda * mean(dist);
  auto h = [&](double M) {
    const double t0 = tail_power_integral(dist, M, 0);
    const double t1 = tail_power_integral(dist, M, 1);
    return p.lambda * (p.theta * t0 + p.eta * (t1 - M * t0)) - target;
  };
  const double hi = quantile(dist, 1.0 - 1e-12);
  if (h(hi) > 0.0) {
    throw NoFiniteRoot(
        "net-profit condition holds for no finite stop-loss deductible in the claim range");
  }
  RootSpec rs;
  rs.lo = 0.0;
  rs.hi = hi;
  rs.residual_tol = 1e-10 * std::max(1.0, p.lambda);
  return find_root_monotone(h, rs).root;
}

}  // namespace ruinopt
