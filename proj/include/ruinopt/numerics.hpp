#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "ruinopt/errors.hpp"

// Deterministic quadrature and root-finding kernel shared by all solvers.
// Everything here is pure: identical inputs give bit-identical outputs.

namespace ruinopt {

struct QuadratureSpec {
  double abs_tol = 1e-11;      // absolute tolerance on each integral
  double rel_tol = 1e-10;      // relative tolerance on each integral
  double survival_cut = 1e-14; // truncate semi-infinite integrands where S_Y < cut
  int max_subdiv = 4000;       // panel budget before QuadratureNoConvergence
};

struct RootSpec {
  double lo = 0.0;
  double hi = 1.0;
  double root_tol = 1e-12;     // absolute tolerance on the root location
  double residual_tol = 1e-10; // |f(root)| must end below this
  int max_iter = 200;
  bool expand_hi = false;      // widen hi geometrically until the sign changes
  bool expand_lo = false;      // shrink lo toward 0 geometrically (assumes lo > 0)
  double growth = 2.0;
  int max_expand = 120;
};

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1] (the classic QUADPACK
// dqk15 abscissae and weights).  The embedded Gauss rule provides the error
// estimate.
inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
inline constexpr double kGkWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct PanelEstimate {
  double integral;
  double error;
};

template <class F>
PanelEstimate gk15(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double f_mid = f(mid);
  double kronrod = kGkWeights[7] * f_mid;
  double gauss = kGaussWeights[3] * f_mid;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGkNodes[i];
    const double sum = f(mid - dx) + f(mid + dx);
    kronrod += kGkWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::abs(kronrod - gauss)};
}

struct Panel {
  double a, b, integral, error;
};

}  // namespace detail

// Adaptive Gauss–Kronrod integration of f over the finite interval [a, b],
// pre-splitting at the supplied interior breakpoints (analytically known
// kinks of the integrand).  Refinement always bisects the panel with the
// largest error estimate, so evaluation order is deterministic.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec,
                 std::vector<double> breakpoints = {}) {
  if (!(b > a)) return 0.0;

  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<detail::Panel> panels;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = std::max(a, breakpoints[i]);
    const double hi = std::min(b, breakpoints[i + 1]);
    if (!(hi > lo)) continue;
    const auto est = detail::gk15(f, lo, hi);
    panels.push_back({lo, hi, est.integral, est.error});
  }
  if (panels.empty()) return 0.0;

  for (int iter = 0; iter < spec.max_subdiv; ++iter) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].integral;
      err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
      return total;
    }
    // Bisect the worst panel.
    detail::Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      // Interval no longer splittable in double precision; accept its value.
      panels[worst].error = 0.0;
      continue;
    }
    const auto left = detail::gk15(f, p.a, mid);
    const auto right = detail::gk15(f, mid, p.b);
    panels[worst] = {p.a, mid, left.integral, left.error};
    panels.push_back({mid, p.b, right.integral, right.error});
  }
  throw QuadratureNoConvergence("adaptive quadrature did not converge within the subdivision budget");
}

// ∫_a^∞ f, evaluated as a finite integral up to `upper` (the caller derives
// the truncation point from the distribution's survival cut) plus a
// caller-supplied analytic tail correction for the discarded piece.
template <class F>
double integrate_semiinfinite(F&& f, double a, double upper, const QuadratureSpec& spec,
                              std::vector<double> breakpoints = {},
                              double tail_correction = 0.0) {
  return integrate(std::forward<F>(f), a, upper, spec, std::move(breakpoints)) + tail_correction;
}

// Safeguarded secant/bisection (Illinois) root finder for a continuous,
// strictly monotone f with a sign change in the bracket.  Optional geometric
// bracket expansion when the caller only knows one side for sure.
template <class F>
RootResult find_root_monotone(F&& f, RootSpec spec) {
  double a = spec.lo, b = spec.hi;
  if (!(a < b)) throw BracketFailure("root bracket is empty");
  double fa = f(a), fb = f(b);
  int evals = 2;

  if (fa == 0.0) return {a, 0.0, evals};
  if (fb == 0.0) return {b, 0.0, evals};

  for (int e = 0; (fa > 0) == (fb > 0) && e < spec.max_expand; ++e) {
    if (spec.expand_hi) {
      const double width = b - a;
      b = b + width * (spec.growth - 1.0);
      fb = f(b);
      ++evals;
      if (fb == 0.0) return {b, 0.0, evals};
      if ((fa > 0) != (fb > 0)) break;
    }
    if (spec.expand_lo) {
      a = a / spec.growth;
      fa = f(a);
      ++evals;
      if (fa == 0.0) return {a, 0.0, evals};
    }
    if (!spec.expand_hi && !spec.expand_lo) break;
  }
  if ((fa > 0) == (fb > 0)) {
    throw BracketFailure("no sign change in bracket after expansion");
  }

  double best_x = std::abs(fa) < std::abs(fb) ? a : b;
  double best_f = std::abs(fa) < std::abs(fb) ? fa : fb;
  int side = 0;  // -1: last replaced a, +1: last replaced b (Illinois damping)

  int it = 0;
  for (; it < spec.max_iter; ++it) {
    if (b - a < spec.root_tol) break;
    double x = b - fb * (b - a) / (fb - fa);
    if (!std::isfinite(x) || x <= a || x >= b) x = 0.5 * (a + b);
    const double fx = f(x);
    ++evals;
    if (std::abs(fx) < std::abs(best_f)) {
      best_f = fx;
      best_x = x;
    }
    if (fx == 0.0) break;
    if ((fx > 0) == (fb > 0)) {
      b = x;
      fb = fx;
      if (side == +1) fa *= 0.5;
      side = +1;
    } else {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    }
  }
  if (it >= spec.max_iter && b - a >= spec.root_tol) {
    throw NumericalFailure("root iteration limit reached before convergence");
  }
  if (!(std::abs(best_f) <= spec.residual_tol)) {
    throw NumericalFailure("root residual exceeds tolerance");
  }
  return {best_x, best_f, evals};
}

}  // namespace ruinopt
