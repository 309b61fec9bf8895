#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ruinopt/classical.hpp"

using namespace ruinopt;

namespace {

const ModelParams kBase{1.0, 1.25, 0.2, 0.1, 1.0};
const ClaimDistribution kExp1 = Exponential{1.0};

// Independent inner solve: plain bisection on
//   phi(R) = (1 + theta) + eta (y - R) - e^{rR},
// which is strictly decreasing with phi(0) > 0.
double oracle_rc(double r, double theta, double eta, double y) {
  auto phi = [&](double R) { return (1.0 + theta) + eta * (y - R) - std::exp(r * R); };
  double lo = 0.0, hi = std::log1p(theta + eta * y) / r + 1e-9;
  for (int i = 0; i < 160; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Scan [lo, hi] on n points for a sign change, then bisect it to full
// precision.  Requires exactly the monotone structure the solvers exploit.
template <class F>
double grid_scan_root(F&& f, double lo, double hi, int n) {
  double a = lo, b = 0.0, fa = f(lo);
  bool found = false;
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double fx = f(x);
    if ((fa > 0.0) != (fx > 0.0)) {
      b = x;
      found = true;
      break;
    }
    a = x;
    fa = fx;
  }
  REQUIRE(found);
  for (int i = 0; i < 90; ++i) {
    const double mid = 0.5 * (a + b);
    ((f(mid) > 0.0) == (fa > 0.0) ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("inner retention root matches bisection oracle and identity") {
  // theta = 0, eta = 1, r = 1, y = 1:  2 - R = e^R  =>  R ~ 0.442854.
  const double r = solve_Rc(1.0, 0.0, 1.0, 1.0);
  CHECK(r == Catch::Approx(0.4428544010).epsilon(1e-9));
  CHECK(r == Catch::Approx(oracle_rc(1.0, 0.0, 1.0, 1.0)).epsilon(1e-13));

  // Defining identity e^{rR} - 1 = theta + eta (y - R) across random tuples.
  std::mt19937_64 gen(20240517);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double rr = 0.05 + 3.0 * u(gen);
    const double th = 2.0 * u(gen);
    const double et = 0.01 + 2.0 * u(gen);
    const double thr = std::log1p(th) / rr;
    const double y = thr + 20.0 * u(gen);
    const double R = solve_Rc(rr, th, et, y);
    const double resid = std::expm1(rr * R) - (th + et * (y - R));
    REQUIRE(std::abs(resid) < 1e-12 * (1.0 + th + et * y));
    REQUIRE(R <= y + 1e-14);
    REQUIRE(R >= thr - 1e-14);
  }
}

TEST_CASE("inner root derivative in y matches finite differences") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double rr = 0.1 + 2.0 * u(gen);
    const double th = 1.5 * u(gen);
    const double et = 0.05 + 1.5 * u(gen);
    const double y = std::log1p(th) / rr + 0.5 + 10.0 * u(gen);
    const double h = 1e-6 * (1.0 + y);
    const double fd = (solve_Rc(rr, th, et, y + h) - solve_Rc(rr, th, et, y - h)) / (2.0 * h);
    const double R = solve_Rc(rr, th, et, y);
    const double formula = et / (et + rr * std::exp(rr * R));
    REQUIRE(fd == Catch::Approx(formula).margin(1e-6));
    REQUIRE(formula > 0.0);
    REQUIRE(formula < 1.0);
  }
}

TEST_CASE("inner solve edge cases") {
  // Below the identity threshold the constrained root is undefined.
  CHECK_THROWS_AS(solve_Rc(1.0, 0.5, 1.0, 0.1), ThresholdViolation);
  // eta = 0: the root sits exactly at the threshold.
  CHECK(solve_Rc(0.5, 0.2, 0.0, 2.0) == Catch::Approx(std::log1p(0.2) / 0.5).epsilon(1e-14));
  // The full retention map is continuous at the threshold and switches from
  // the identity to the constrained branch there.
  const double rho = 0.4, th = 0.2, et = 0.3;
  const double thr = std::log1p(th) / rho;
  CHECK(retention_hRJ(rho, th, et, thr * (1.0 - 1e-9)) ==
        Catch::Approx(thr * (1.0 - 1e-9)).epsilon(1e-12));
  CHECK(retention_hRJ(rho, th, et, thr) == Catch::Approx(thr).epsilon(1e-12));
  // Right slope just above the threshold: eta / (eta + (1+theta) rho).
  const RetentionFunction ret{ClassicalOptimal{rho, th, et}};
  CHECK(retained_slope(ret, thr * (1.0 + 1e-9)) ==
        Catch::Approx(et / (et + (1.0 + th) * rho)).epsilon(1e-6));
}

TEST_CASE("Lundberg functional root has closed form for full retention") {
  // lambda = 1, Exp(1), c = 1.5, beta = 1, full retention:
  //   j(r) = 1.5 r - r^2/2 - r/(1-r),  positive root r = 2 - sqrt(3).
  const ModelParams p{1.0, 1.5, 0.0, 0.6, 1.0};
  CHECK(classical_j(p, kExp1, Full{}, 0.2) ==
        Catch::Approx(1.5 * 0.2 - 0.5 * 0.04 - 0.2 / 0.8).epsilon(1e-12));
  const double root = adjustment_for_retention(p, kExp1, Full{});
  CHECK(root == Catch::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-10));

  // Independent grid oracle on the same function.
  const double oracle = grid_scan_root(
      [&](double r) { return 1.5 * r - 0.5 * r * r - r / (1.0 - r); }, 1e-4, 0.999, 4000);
  CHECK(root == Catch::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("adjustment coefficient of a retention sits below its diffusion rate") {
  const std::vector<RetentionFunction> rets = {Full{}, QuotaShare{0.5},
                                               StopLoss{mean(kExp1)}};
  for (const auto& ret : rets) {
    REQUIRE(net_profit_holds(kBase, kExp1, ret));
    const double rj = adjustment_for_retention(kBase, kExp1, ret);
    const double rd = rho_D_of_R(kBase, kExp1, ret);
    REQUIRE(rj > 0.0);
    REQUIRE(rj < rd);
  }
  CHECK_THROWS_AS(adjustment_for_retention(kBase, kExp1, Zero{}), NetProfitViolated);
  CHECK_THROWS_AS(adjustment_for_retention(kBase, kExp1, QuotaShare{1e-9}),
                  NetProfitViolated);
}

TEST_CASE("outer solve matches an independent fixed-point oracle") {
  const auto sol = solve_rho_J(kBase, kExp1);

  // Oracle form: W(r) = lambda Int (e^{r hR(y)} - 1) S dy + beta^2 r/2 - (c - lambda mu),
  // increasing in r, with the retention evaluated by bisection only.
  QuadratureSpec oq;
  oq.max_subdiv = 20000;
  const double T = quantile(kExp1, 1.0 - 1e-13);
  auto W = [&](double r) {
    const double I = integrate(
        [&](double y) {
          const double hR = std::min(y, oracle_rc(r, kBase.theta, kBase.eta, y));
          return std::expm1(r * hR) * survival(kExp1, y);
        },
        0.0, T, oq, {std::log1p(kBase.theta) / r});
    return kBase.lambda * I + 0.5 * kBase.beta * kBase.beta * r -
           (kBase.c - kBase.lambda * mean(kExp1));
  };
  const double oracle = grid_scan_root(W, 1e-4, sol.rho_D, 400);
  CHECK(sol.rho_J == Catch::Approx(oracle).epsilon(1e-7));

  CHECK(sol.threshold == Catch::Approx(std::log1p(kBase.theta) / sol.rho_J).epsilon(1e-14));
  CHECK(std::abs(sol.residual) < 1e-9 * kBase.c);
  CHECK(sol.rho_J < sol.rho_D);
  CHECK(sol.rho_D - sol.rho_J > 1e-6);

  // Self-consistency: the optimal retention's own Lundberg root is rho_J.
  const double again = adjustment_for_retention(kBase, kExp1, sol.retention);
  CHECK(again == Catch::Approx(sol.rho_J).epsilon(1e-9));

  // The residual really measures the equation: perturbing rho breaks it.
  CHECK(std::abs(classical_equation_residual(sol.rho_J * 1.01, kBase, kExp1)) > 1e-5);
}

TEST_CASE("outer solve works across claim families") {
  const std::vector<ClaimDistribution> dists = {
      kExp1,
      GammaClaims{2.0, 2.0},
      GammaClaims{0.5, 0.5},
      UniformClaims{2.0},
      make_empirical({0.4, 1.1, 2.5}, {0.5, 0.3, 0.2}),
  };
  for (const auto& dist : dists) {
    // Keep kappa > 0 and c > lambda mu for every family (mu varies).
    const double mu = mean(dist);
    const double m2 = second_moment(dist);
    ModelParams p{1.0, 0.0, 0.2, 0.1, 1.0};
    p.c = 0.5 * (mu + (1.2 * mu + 0.05 * m2));  // halfway between the two bounds
    const auto sol = solve_rho_J(p, dist);
    REQUIRE(sol.rho_J > 0.0);
    REQUIRE(sol.rho_J < sol.rho_D);
    REQUIRE(std::abs(sol.residual) < 1e-9 * std::max(1.0, p.c));
    REQUIRE(std::abs(classical_equation_residual(sol.rho_J, p, dist)) <
            1e-9 * std::max(1.0, p.c));
  }
}

TEST_CASE("optimal retention shape: monotone, 1-Lipschitz, concave, capped") {
  const auto sol = solve_rho_J(kBase, kExp1);
  const RetentionFunction ret{sol.retention};
  const int n = 400;
  const double ymax = 30.0;
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double y = ymax * i / n;
    vals[i] = retained(ret, y);
    const double cap = std::min(y, asymptote_g(sol.rho_J, kBase.theta, kBase.eta, y));
    REQUIRE(vals[i] <= cap + 1e-12);
    if (y <= sol.threshold) REQUIRE(vals[i] == Catch::Approx(y).margin(1e-14));
  }
  const double h = ymax / n;
  for (int i = 1; i <= n; ++i) {
    REQUIRE(vals[i] >= vals[i - 1] - 1e-12);           // non-decreasing
    REQUIRE(vals[i] - vals[i - 1] <= h + 1e-12);       // 1-Lipschitz
  }
  for (int i = 1; i < n; ++i) {
    REQUIRE(vals[i + 1] - 2.0 * vals[i] + vals[i - 1] <= 1e-8 * h);  // concave
  }
  // The asymptote gap decays like log(eta y) / (rho^2 y); its maximum sits
  // near e/eta, so compare two points beyond that.
  const double gap_mid = asymptote_g(sol.rho_J, kBase.theta, kBase.eta, 50.0) -
                         retained(ret, 50.0);
  const double gap_far = asymptote_g(sol.rho_J, kBase.theta, kBase.eta, 400.0) -
                         retained(ret, 400.0);
  CHECK(gap_mid > gap_far);
  CHECK(gap_far > 0.0);
}

TEST_CASE("no quota or stop-loss competitor beats the optimal coefficients") {
  const auto sol = solve_rho_J(kBase, kExp1);
  const auto diff = solve_alpha_star(kBase, kExp1);
  for (int i = 1; i <= 12; ++i) {
    const double q = i / 12.0;
    if (net_profit_holds(kBase, kExp1, QuotaShare{q})) {
      const double r = adjustment_for_retention(kBase, kExp1, QuotaShare{q});
      REQUIRE(r <= sol.rho_J + 1e-9);
      REQUIRE(rho_D_of_R(kBase, kExp1, QuotaShare{q}) <= diff.rho_D + 1e-9);
    }
    const double M = 0.1 + 0.4 * i;
    if (net_profit_holds(kBase, kExp1, StopLoss{M})) {
      const double r = adjustment_for_retention(kBase, kExp1, StopLoss{M});
      REQUIRE(r <= sol.rho_J + 1e-9);
      REQUIRE(rho_D_of_R(kBase, kExp1, StopLoss{M}) <= diff.rho_D + 1e-9);
    }
  }
}

TEST_CASE("pure deductible specialization at eta = 0") {
  ModelParams p{1.0, 1.15, 0.2, 0.0, 1.0};
  const auto ded = eta0_classical(p, kExp1);
  CHECK(ded.deductible == Catch::Approx(std::log1p(p.theta) / ded.rho_J).epsilon(1e-12));

  // The general solver degenerates to the same coefficient.
  const auto sol = solve_rho_J(p, kExp1);
  CHECK(sol.rho_J == Catch::Approx(ded.rho_J).epsilon(1e-9));

  // Exp(1) closed form of the fixed point: Int_0^d (1.2 - e^{ry}) e^{-y} dy
  // with d = ln(1.2)/r equals 1.2 lambda - c + r/2 ... verified via oracle.
  const double oracle = grid_scan_root(
      [&](double r) {
        const double d = std::log1p(p.theta) / r;
        const double I = (1.0 + p.theta) * (1.0 - std::exp(-d)) -
                         (std::exp((r - 1.0) * d) - 1.0) / (r - 1.0);
        return (1.0 + p.theta) - p.c + 0.5 * r - I;  // lambda = mu = 1
      },
      1e-4, 1.0, 4000);
  CHECK(ded.rho_J == Catch::Approx(oracle).epsilon(1e-9));

  // Jump deductible sits strictly below the diffusion deductible.
  const auto dd = eta0_deductible(p, kExp1);
  CHECK(ded.deductible < dd.deductible - 1e-6);

  // Retention is min(y, d): the constrained branch is flat for eta = 0.
  CHECK(retention_hRJ(ded.rho_J, p.theta, 0.0, 10.0) ==
        Catch::Approx(ded.deductible).epsilon(1e-12));

  CHECK_THROWS_AS(eta0_classical(kBase, kExp1), ParamsInvariantViolated);
}

TEST_CASE("theta = 0 crossing of the jump and diffusion retentions") {
  ModelParams p{1.0, 1.1, 0.0, 0.2, 1.0};
  const double y0 = tet0_crossing(p, kExp1);

  const auto sol = solve_rho_J(p, kExp1);
  const double alpha = sol.rho_D + p.eta;
  auto diff = [&](double y) {
    return oracle_rc(sol.rho_J, 0.0, p.eta, y) - (p.eta / alpha) * y;
  };
  // Structure: jump model retains more for small claims, less for large.
  CHECK(diff(y0 * 0.5) > 0.0);
  CHECK(diff(y0 * 2.0) < 0.0);

  const double oracle = grid_scan_root(diff, 1e-4, quantile(kExp1, 1.0 - 1e-12), 4000);
  CHECK(y0 == Catch::Approx(oracle).epsilon(1e-8));

  CHECK_THROWS_AS(tet0_crossing(kBase, kExp1), ParamsInvariantViolated);
}
