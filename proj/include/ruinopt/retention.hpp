#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "ruinopt/errors.hpp"

// Retention (risk-sharing) functions R: for a claim of size y the insurer
// pays R(y) and the reinsurer pays y - R(y).  All variants are continuous,
// non-decreasing and satisfy 0 <= R(y) <= y.

namespace ruinopt {

struct Full {};  // R(y) = y (no reinsurance)
struct Zero {};  // R(y) = 0 (full reinsurance)

struct QuotaShare {
  double proportion;  // R(y) = q y, q in [0, 1]
};

struct StopLoss {
  double deductible;  // R(y) = min(M, y)
};

// R(y) = min(y, (theta + eta y) / alpha): identity below the kink
// theta/(alpha - eta), affine with slope eta/alpha above it.
struct DiffusionOptimal {
  double alpha;
  double theta;
  double eta;
};

// R(y) = min(y, R_c(rho, y)) where R_c solves
//   e^{rho R} = 1 + theta + eta (y - R);
// the switch from identity happens exactly at log1p(theta)/rho.
struct ClassicalOptimal {
  double rho;
  double theta;
  double eta;
};

// Piecewise-linear table; linear extrapolation with the last segment's slope
// beyond the grid.  Grid must start at 0 with value 0.
struct Tabulated {
  std::vector<double> grid;
  std::vector<double> values;
};

using RetentionFunction =
    std::variant<Full, Zero, QuotaShare, StopLoss, DiffusionOptimal, ClassicalOptimal, Tabulated>;

namespace detail {

// Newton iteration for R_c: phi(R) = (1+theta) + eta y - eta R - e^{rho R}
// is strictly decreasing and concave, so Newton from the right bracket end
// log1p(theta + eta y)/rho converges monotonically.
inline double rc_root(double rho, double theta, double eta, double y) {
  if (eta == 0.0) return std::log1p(theta) / rho;
  const double hi = std::log1p(theta + eta * y) / rho;
  double x = hi;
  for (int i = 0; i < 64; ++i) {
    const double e = std::exp(rho * x);
    const double phi = (1.0 + theta) + eta * (y - x) - e;
    const double dphi = -eta - rho * e;
    const double step = phi / dphi;
    x -= step;
    if (x < 0.0) x = 0.0;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return std::clamp(x, 0.0, hi);
}

// dR_c/dy by implicit differentiation of the defining equation.
inline double rc_root_dy(double rho, double theta, double eta, double y) {
  if (eta == 0.0) return 0.0;
  const double R = rc_root(rho, theta, eta, y);
  return eta / (eta + rho * std::exp(rho * R));
}

inline double tabulated_value(const Tabulated& t, double y) {
  const auto& g = t.grid;
  const auto& v = t.values;
  if (y <= g.front()) return v.front();
  std::size_t i = std::upper_bound(g.begin(), g.end(), y) - g.begin();
  if (i >= g.size()) {
    const std::size_t n = g.size() - 1;
    const double slope = (v[n] - v[n - 1]) / (g[n] - g[n - 1]);
    return v[n] + slope * (y - g[n]);
  }
  const double w = (y - g[i - 1]) / (g[i] - g[i - 1]);
  return v[i - 1] + w * (v[i] - v[i - 1]);
}

inline double tabulated_slope(const Tabulated& t, double y) {
  const auto& g = t.grid;
  const auto& v = t.values;
  std::size_t i = std::upper_bound(g.begin(), g.end(), y) - g.begin();
  if (i == 0) i = 1;
  if (i >= g.size()) i = g.size() - 1;
  return (v[i] - v[i - 1]) / (g[i] - g[i - 1]);
}

}  // namespace detail

inline void validate(const RetentionFunction& ret) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, QuotaShare>) {
          if (!(r.proportion >= 0.0 && r.proportion <= 1.0))
            throw ConfigError("quota-share proportion must lie in [0, 1]");
        } else if constexpr (std::is_same_v<T, StopLoss>) {
          if (!(r.deductible >= 0.0))
            throw ConfigError("stop-loss deductible must be non-negative");
        } else if constexpr (std::is_same_v<T, DiffusionOptimal>) {
          if (!(r.alpha > 0.0 && r.theta >= 0.0 && r.eta >= 0.0))
            throw ConfigError("diffusion-optimal retention needs alpha > 0, theta >= 0, eta >= 0");
        } else if constexpr (std::is_same_v<T, ClassicalOptimal>) {
          if (!(r.rho > 0.0 && r.theta >= 0.0 && r.eta >= 0.0))
            throw ConfigError("classical-optimal retention needs rho > 0, theta >= 0, eta >= 0");
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          if (r.grid.size() < 2 || r.grid.size() != r.values.size())
            throw ConfigError("tabulated retention needs at least two (y, R) pairs");
          if (r.grid.front() != 0.0 || r.values.front() != 0.0)
            throw ConfigError("tabulated retention must start at (0, 0)");
          for (std::size_t i = 1; i < r.grid.size(); ++i) {
            if (!(r.grid[i] > r.grid[i - 1]))
              throw ConfigError("tabulated retention grid must be strictly increasing");
            if (r.values[i] < r.values[i - 1])
              throw ConfigError("tabulated retention must be non-decreasing");
            if (r.values[i] > r.grid[i] * (1.0 + 1e-12) + 1e-12)
              throw ConfigError("tabulated retention must satisfy R(y) <= y");
          }
          const std::size_t n = r.grid.size() - 1;
          if ((r.values[n] - r.values[n - 1]) > (r.grid[n] - r.grid[n - 1]) * (1.0 + 1e-12))
            throw ConfigError("tabulated retention extrapolation slope must not exceed 1");
        } else {
          (void)r;
        }
      },
      ret);
}

inline double retained(const RetentionFunction& ret, double y) {
  if (y <= 0.0) return 0.0;
  return std::visit(
      [y](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Full>) {
          return y;
        } else if constexpr (std::is_same_v<T, Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, QuotaShare>) {
          return r.proportion * y;
        } else if constexpr (std::is_same_v<T, StopLoss>) {
          return std::min(r.deductible, y);
        } else if constexpr (std::is_same_v<T, DiffusionOptimal>) {
          return std::min(y, (r.theta + r.eta * y) / r.alpha);
        } else if constexpr (std::is_same_v<T, ClassicalOptimal>) {
          return std::min(y, detail::rc_root(r.rho, r.theta, r.eta, y));
        } else {
          return std::min(y, std::max(0.0, detail::tabulated_value(r, y)));
        }
      },
      ret);
}

// Right derivative dR/dy (piecewise; used for survival-form quadrature).
inline double retained_slope(const RetentionFunction& ret, double y) {
  return std::visit(
      [y](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Full>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, QuotaShare>) {
          return r.proportion;
        } else if constexpr (std::is_same_v<T, StopLoss>) {
          return y < r.deductible ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, DiffusionOptimal>) {
          if (r.alpha <= r.eta) return 1.0;
          return y < r.theta / (r.alpha - r.eta) ? 1.0 : r.eta / r.alpha;
        } else if constexpr (std::is_same_v<T, ClassicalOptimal>) {
          if (y < std::log1p(r.theta) / r.rho) return 1.0;
          return detail::rc_root_dy(r.rho, r.theta, r.eta, y);
        } else {
          return detail::tabulated_slope(r, y);
        }
      },
      ret);
}

// Interior points where R is not differentiable (quadrature panel splits).
inline std::vector<double> retention_kinks(const RetentionFunction& ret) {
  return std::visit(
      [](const auto& r) -> std::vector<double> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, StopLoss>) {
          return r.deductible > 0.0 ? std::vector<double>{r.deductible} : std::vector<double>{};
        } else if constexpr (std::is_same_v<T, DiffusionOptimal>) {
          if (r.alpha <= r.eta || r.theta == 0.0) return {};
          return {r.theta / (r.alpha - r.eta)};
        } else if constexpr (std::is_same_v<T, ClassicalOptimal>) {
          const double thr = std::log1p(r.theta) / r.rho;
          return thr > 0.0 ? std::vector<double>{thr} : std::vector<double>{};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return std::vector<double>(r.grid.begin() + 1, r.grid.end());
        } else {
          (void)r;
          return {};
        }
      },
      ret);
}

// Exact affine tail R(y) = offset + slope * y for y >= start, when one exists.
struct AffineTail {
  double start;
  double offset;
  double slope;
};

inline std::optional<AffineTail> affine_tail(const RetentionFunction& ret) {
  return std::visit(
      [](const auto& r) -> std::optional<AffineTail> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Full>) {
          return AffineTail{0.0, 0.0, 1.0};
        } else if constexpr (std::is_same_v<T, Zero>) {
          return AffineTail{0.0, 0.0, 0.0};
        } else if constexpr (std::is_same_v<T, QuotaShare>) {
          return AffineTail{0.0, 0.0, r.proportion};
        } else if constexpr (std::is_same_v<T, StopLoss>) {
          return AffineTail{r.deductible, r.deductible, 0.0};
        } else if constexpr (std::is_same_v<T, DiffusionOptimal>) {
          if (r.alpha <= r.eta) return AffineTail{0.0, 0.0, 1.0};
          return AffineTail{r.theta / (r.alpha - r.eta), r.theta / r.alpha, r.eta / r.alpha};
        } else if constexpr (std::is_same_v<T, ClassicalOptimal>) {
          return std::nullopt;  // logarithmic growth, no exact affine tail
        } else {
          const std::size_t n = r.grid.size() - 1;
          const double slope = (r.values[n] - r.values[n - 1]) / (r.grid[n] - r.grid[n - 1]);
          return AffineTail{r.grid[n], r.values[n] - slope * r.grid[n], slope};
        }
      },
      ret);
}

// Asymptotic linear-growth rate of R; E e^{rR} is finite iff
// r * growth < mgf radius of the claims (always finite when growth = 0).
inline double retention_growth_slope(const RetentionFunction& ret) {
  if (const auto tail = affine_tail(ret)) return std::max(0.0, tail->slope);
  return 0.0;  // classical-optimal retention grows logarithmically
}

}  // namespace ruinopt
