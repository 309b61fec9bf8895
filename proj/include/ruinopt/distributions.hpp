#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "ruinopt/errors.hpp"
#include "ruinopt/numerics.hpp"

// Claim-size distributions.  Everything funnels through one kernel,
//   upper_exp_moment(M, r, m) = E[ Y^m e^{rY} 1{Y > M} ],
// which each family implements in closed form; survival-weighted tail
// integrals, excess-of-loss statistics and moment generating functions are
// exact algebraic combinations of that kernel.

namespace ruinopt {

struct Exponential {
  double rate;  // nu
};

struct GammaClaims {
  double shape;  // k
  double rate;   // nu
};

struct UniformClaims {
  double width;  // support [0, width]
};

struct EmpiricalFinite {
  std::vector<double> atoms;    // sorted ascending, >= 0
  std::vector<double> weights;  // positive, sum to 1
};

using ClaimDistribution =
    std::variant<Exponential, GammaClaims, UniformClaims, EmpiricalFinite>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline constexpr double kFactorial[8] = {1, 1, 2, 6, 24, 120, 720, 5040};

inline void require(bool ok, const char* what) {
  if (!ok) throw DistributionUnsupported(what);
}

}  // namespace detail

// Construction helper: sorts atoms, merges duplicates, normalizes weights.
inline EmpiricalFinite make_empirical(std::vector<double> atoms, std::vector<double> weights) {
  detail::require(atoms.size() == weights.size() && !atoms.empty(),
                  "empirical claims need matching, non-empty atoms and weights");
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });
  EmpiricalFinite e;
  double total = 0.0;
  for (std::size_t idx : order) {
    detail::require(atoms[idx] >= 0.0 && std::isfinite(atoms[idx]),
                    "empirical atoms must be finite and non-negative");
    detail::require(weights[idx] > 0.0 && std::isfinite(weights[idx]),
                    "empirical weights must be positive");
    if (!e.atoms.empty() && atoms[idx] == e.atoms.back()) {
      e.weights.back() += weights[idx];
    } else {
      e.atoms.push_back(atoms[idx]);
      e.weights.push_back(weights[idx]);
    }
    total += weights[idx];
  }
  for (double& w : e.weights) w /= total;
  detail::require(e.atoms.back() > 0.0, "empirical claims must have positive mean");
  return e;
}

inline void validate(const ClaimDistribution& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          detail::require(d.rate > 0.0 && std::isfinite(d.rate),
                          "exponential claims need rate > 0");
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          detail::require(d.shape > 0.0 && std::isfinite(d.shape),
                          "gamma claims need shape > 0");
          detail::require(d.rate > 0.0 && std::isfinite(d.rate), "gamma claims need rate > 0");
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          detail::require(d.width > 0.0 && std::isfinite(d.width),
                          "uniform claims need width > 0");
        } else {
          detail::require(!d.atoms.empty() && d.atoms.size() == d.weights.size(),
                          "empirical claims need matching, non-empty atoms and weights");
          double total = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            detail::require(d.atoms[i] >= 0.0, "empirical atoms must be non-negative");
            detail::require(i == 0 || d.atoms[i] > d.atoms[i - 1],
                            "empirical atoms must be strictly sorted");
            detail::require(d.weights[i] > 0.0, "empirical weights must be positive");
            total += d.weights[i];
          }
          detail::require(std::abs(total - 1.0) < 1e-9, "empirical weights must sum to 1");
          detail::require(d.atoms.back() > 0.0, "empirical claims must have positive mean");
        }
      },
      dist);
}

// ---------------------------------------------------------------------------
// Survival, density/mass, quantiles.

inline double survival(const ClaimDistribution& dist, double y) {
  if (y < 0.0) return 1.0;
  return std::visit(
      [y](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return std::exp(-d.rate * y);
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          return boost::math::gamma_q(d.shape, d.rate * y);
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return y >= d.width ? 0.0 : 1.0 - y / d.width;
        } else {
          double s = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i)
            if (d.atoms[i] > y) s += d.weights[i];
          return s;
        }
      },
      dist);
}

// Density for the continuous families; point mass for the empirical one.
inline double density(const ClaimDistribution& dist, double y) {
  if (y < 0.0) return 0.0;
  return std::visit(
      [y](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return d.rate * std::exp(-d.rate * y);
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          if (y == 0.0) return d.shape > 1.0 ? 0.0 : (d.shape == 1.0 ? d.rate : kInf);
          return std::exp(d.shape * std::log(d.rate) + (d.shape - 1.0) * std::log(y) -
                          d.rate * y - std::lgamma(d.shape));
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return y <= d.width ? 1.0 / d.width : 0.0;
        } else {
          for (std::size_t i = 0; i < d.atoms.size(); ++i)
            if (d.atoms[i] == y) return d.weights[i];
          return 0.0;
        }
      },
      dist);
}

inline double quantile(const ClaimDistribution& dist, double p) {
  detail::require(p >= 0.0 && p <= 1.0, "quantile level must lie in [0, 1]");
  return std::visit(
      [p](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return p >= 1.0 ? kInf : -std::log1p(-p) / d.rate;
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          if (p >= 1.0) return kInf;
          return boost::math::gamma_q_inv(d.shape, 1.0 - p) / d.rate;
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return p * d.width;
        } else {
          double cum = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            cum += d.weights[i];
            if (cum >= p) return d.atoms[i];
          }
          return d.atoms.back();
        }
      },
      dist);
}

// Smallest y with S_Y(y) <= cut (support endpoint for bounded families).
inline double truncation_point(const ClaimDistribution& dist, double cut) {
  return std::visit(
      [cut](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return -std::log(cut) / d.rate;
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          return boost::math::gamma_q_inv(d.shape, cut) / d.rate;
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return d.width;
        } else {
          return d.atoms.back();
        }
      },
      dist);
}

// Points where S_Y or the density is non-smooth; quadrature panels split here.
inline std::vector<double> quadrature_breakpoints(const ClaimDistribution& dist) {
  return std::visit(
      [](const auto& d) -> std::vector<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformClaims>) {
          return {d.width};
        } else if constexpr (std::is_same_v<T, EmpiricalFinite>) {
          return d.atoms;
        } else {
          (void)d;
          return {};
        }
      },
      dist);
}

// Radius of convergence of the moment generating function.
inline double mgf_radius(const ClaimDistribution& dist) {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return d.rate;
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          return d.rate;
        } else {
          (void)d;
          return kInf;
        }
      },
      dist);
}

// ---------------------------------------------------------------------------
// The kernel: E[Y^m e^{rY} 1{Y > M}] for m in 0..6, r < mgf radius.

namespace detail {

// /int_M^infty y^m e^{-a y} dy = e^{-aM} sum_{i=0}^m (m!/i!) M^i a^{i-m-1},  a > 0.
inline double upper_poly_exp(double M, double a, int m) {
  double sum = 0.0;
  double Mpow = 1.0;
  for (int i = 0; i <= m; ++i) {
    sum += kFactorial[m] / kFactorial[i] * Mpow * std::pow(a, i - m - 1);
    Mpow *= M;
  }
  return std::exp(-a * M) * sum;
}

// (1/b) * /int_lo^hi y^m e^{ry} dy  (finite for every r).
inline double uniform_poly_exp(double lo, double hi, double b, double r, int m) {
  if (!(hi > lo)) return 0.0;
  if (r == 0.0) {
    return (std::pow(hi, m + 1) - std::pow(lo, m + 1)) / ((m + 1) * b);
  }
  if (m == 0) {
    return std::exp(r * lo) * std::expm1(r * (hi - lo)) / (r * b);
  }
  if (std::abs(r) * hi < 0.5) {
    // Power series in r; converges geometrically in this regime.
    double sum = 0.0, rj = 1.0;  // rj = r^j / j!
    for (int j = 0; j < 60; ++j) {
      const double term = rj * (std::pow(hi, m + j + 1) - std::pow(lo, m + j + 1)) / (m + j + 1);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
      rj *= r / (j + 1);
    }
    return sum / b;
  }
  // Repeated integration by parts: /int y^m e^{ry} dy = e^{ry} p(y).
  auto poly = [r, m](double y) {
    double acc = 0.0, ypow = 1.0;
    std::vector<double> yp(m + 1);
    for (int i = 0; i <= m; ++i) {
      yp[i] = ypow;
      ypow *= y;
    }
    double sign = 1.0, rpow = r;
    for (int i = 0; i <= m; ++i) {
      acc += sign * kFactorial[m] / kFactorial[m - i] * yp[m - i] / rpow;
      sign = -sign;
      rpow *= r;
    }
    return acc;
  };
  return (std::exp(r * hi) * poly(hi) - std::exp(r * lo) * poly(lo)) / b;
}

}  // namespace detail

inline double upper_exp_moment(const ClaimDistribution& dist, double M, double r, int m) {
  detail::require(m >= 0 && m <= 6, "tail moment order out of range");
  if (M < 0.0) M = 0.0;
  if (!(r < mgf_radius(dist))) {
    throw MgfDomainExceeded("exponential moment argument reaches the MGF radius");
  }
  return std::visit(
      [M, r, m](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return d.rate * detail::upper_poly_exp(M, d.rate - r, m);
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          const double a = d.rate - r;
          const double logc = d.shape * std::log(d.rate) - std::lgamma(d.shape) +
                              std::lgamma(d.shape + m) - (d.shape + m) * std::log(a);
          return std::exp(logc) * boost::math::gamma_q(d.shape + m, a * M);
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return detail::uniform_poly_exp(std::min(M, d.width), d.width, d.width, r, m);
        } else {
          double sum = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            if (d.atoms[i] > M)
              sum += d.weights[i] * std::pow(d.atoms[i], m) * std::exp(r * d.atoms[i]);
          }
          return sum;
        }
      },
      dist);
}

// E[e^{rY} 1{Y <= M}], finite for every real r (bounded integration range).
inline double lower_exp_moment(const ClaimDistribution& dist, double M, double r,
                               const QuadratureSpec& spec = {}) {
  if (M <= 0.0) return 0.0;
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          const double a = d.rate - r;
          if (a == 0.0) return d.rate * M;
          return -d.rate * std::expm1(-a * M) / a;
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          const double a = d.rate - r;
          if (a > 0.5 * d.rate) {
            return std::exp(d.shape * std::log(d.rate / a)) *
                   boost::math::gamma_p(d.shape, a * M);
          }
          // Near/beyond the MGF radius: integrate by parts against the
          // survival function, which stays smooth and bounded.
          ClaimDistribution self = d;
          const double tail =
              integrate([&](double y) { return std::exp(r * y) * survival(self, y); }, 0.0, M,
                        spec);
          return 1.0 - std::exp(r * M) * survival(self, M) + r * tail;
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return detail::uniform_poly_exp(0.0, std::min(M, d.width), d.width, r, 0);
        } else {
          double sum = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            if (d.atoms[i] <= M) sum += d.weights[i] * std::exp(r * d.atoms[i]);
          }
          return sum;
        }
      },
      dist);
}

inline double moment(const ClaimDistribution& dist, int m) {
  return upper_exp_moment(dist, 0.0, 0.0, m);
}

inline double mean(const ClaimDistribution& dist) { return moment(dist, 1); }
inline double second_moment(const ClaimDistribution& dist) { return moment(dist, 2); }
inline double third_moment(const ClaimDistribution& dist) { return moment(dist, 3); }

inline double mgf(const ClaimDistribution& dist, double r) {
  return upper_exp_moment(dist, 0.0, r, 0);
}

// ---------------------------------------------------------------------------
// Survival-weighted tail integrals (integration by parts against the kernel).

// /int_M^infty y^k S_Y(y) dy = (E[Y^{k+1} 1{Y>M}] - M^{k+1} S(M)) / (k+1).
inline double tail_power_integral(const ClaimDistribution& dist, double M, int k) {
  if (M < 0.0) M = 0.0;
  const double up = upper_exp_moment(dist, M, 0.0, k + 1);
  return (up - std::pow(M, k + 1) * survival(dist, M)) / (k + 1);
}

// /int_M^infty e^{ry} S_Y(y) dy, r < mgf radius.
inline double tail_exp_integral(const ClaimDistribution& dist, double M, double r) {
  if (M < 0.0) M = 0.0;
  if (std::abs(r) < 1e-7) {
    // Series in r to dodge the 0/0 cancellation of the closed form.
    double sum = 0.0, rj = 1.0;
    for (int j = 0; j <= 4; ++j) {
      sum += rj * tail_power_integral(dist, M, j);
      rj *= r / (j + 1);
    }
    return sum;
  }
  const double up = upper_exp_moment(dist, M, r, 0);
  return (up - std::exp(r * M) * survival(dist, M)) / r;
}

// ---------------------------------------------------------------------------
// Excess-of-loss statistics for Z_d = (Y - d) | (Y > d).

inline double excess_mean(const ClaimDistribution& dist, double d) {
  const double s = survival(dist, d);
  detail::require(s > 0.0, "excess statistics need P(Y > d) > 0");
  return (upper_exp_moment(dist, d, 0.0, 1) - d * s) / s;
}

// E[Z_d^2 e^{s Z_d}],  s < mgf radius.
inline double excess_square_exp(const ClaimDistribution& dist, double d, double s) {
  const double sv = survival(dist, d);
  detail::require(sv > 0.0, "excess statistics need P(Y > d) > 0");
  const double u0 = upper_exp_moment(dist, d, s, 0);
  const double u1 = upper_exp_moment(dist, d, s, 1);
  const double u2 = upper_exp_moment(dist, d, s, 2);
  return std::exp(-s * d) * (u2 - 2.0 * d * u1 + d * d * u0) / sv;
}

// ---------------------------------------------------------------------------
// Scaling: distribution of s * Y (each family is closed under rescaling).

inline ClaimDistribution scale_claims(const ClaimDistribution& dist, double s) {
  detail::require(s > 0.0 && std::isfinite(s), "claim scale factor must be positive");
  return std::visit(
      [s](const auto& d) -> ClaimDistribution {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return Exponential{d.rate / s};
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          return GammaClaims{d.shape, d.rate / s};
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return UniformClaims{d.width * s};
        } else {
          EmpiricalFinite e = d;
          for (double& a : e.atoms) a *= s;
          return e;
        }
      },
      dist);
}

// ---------------------------------------------------------------------------
// Sampling.  Rng must expose u01() -> (0,1] and normal() -> N(0,1).

namespace detail {

template <class Rng>
double sample_gamma_shape_ge1(double shape, Rng& rng) {
  // Marsaglia–Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.u01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace detail

template <class Rng>
double sample(const ClaimDistribution& dist, Rng& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return -std::log(rng.u01()) / d.rate;
        } else if constexpr (std::is_same_v<T, GammaClaims>) {
          if (d.shape >= 1.0) {
            return detail::sample_gamma_shape_ge1(d.shape, rng) / d.rate;
          }
          // Boost a sub-unit shape: Gamma(k) = Gamma(k+1) * U^{1/k}.
          const double g = detail::sample_gamma_shape_ge1(d.shape + 1.0, rng);
          return g * std::pow(rng.u01(), 1.0 / d.shape) / d.rate;
        } else if constexpr (std::is_same_v<T, UniformClaims>) {
          return rng.u01() * d.width;
        } else {
          const double u = rng.u01();
          double cum = 0.0;
          for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            cum += d.weights[i];
            if (u <= cum) return d.atoms[i];
          }
          return d.atoms.back();
        }
      },
      dist);
}

}  // namespace ruinopt
