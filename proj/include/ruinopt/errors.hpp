#pragma once

#include <stdexcept>
#include <string>

namespace ruinopt {

// Error taxonomy shared by the whole library.
//
// Two families matter for the CLI exit-code contract: problems with the
// user-supplied configuration derive from ConfigError (exit code 1), and
// failures of the numerical machinery or of mathematical feasibility derive
// from NumericalError (exit code 2).

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- configuration / validation ------------------------------------------

struct ConfigError : Error {
  using Error::Error;
};

// Model parameters violate the standing assumptions (positive safety loading,
// full reinsurance unaffordable, positive volatility, θ + η > 0).
struct ParamsInvariantViolated : ConfigError {
  using ConfigError::ConfigError;
};

// Distribution parameters outside the supported light-tailed families, or a
// moment integral that does not converge.
struct DistributionUnsupported : ConfigError {
  using ConfigError::ConfigError;
};

// --- numerical / feasibility ----------------------------------------------

struct NumericalError : Error {
  using Error::Error;
};

// Generic solver failure (no convergence, residual too large, ...).
struct NumericalFailure : NumericalError {
  using NumericalError::NumericalError;
};

// No sign change found after automatic bracket expansion.
struct BracketFailure : NumericalError {
  using NumericalError::NumericalError;
};

// Adaptive quadrature hit its subdivision limit.
struct QuadratureNoConvergence : NumericalError {
  using NumericalError::NumericalError;
};

// Exponential moment requested at or beyond the radius of convergence.
struct MgfDomainExceeded : NumericalError {
  using NumericalError::NumericalError;
};

// Retention makes the controlled drift non-positive: the net-profit
// condition fails and no adjustment coefficient exists.
struct NetProfitViolated : NumericalError {
  using NumericalError::NumericalError;
};

// Quota-share admissibility quadratic has no real root.
struct NoAdmissibleQuota : NumericalError {
  using NumericalError::NumericalError;
};

// Defining equation has no finite root (e.g. stop-loss bound as the
// variance loading vanishes).
struct NoFiniteRoot : NumericalError {
  using NumericalError::NumericalError;
};

// j(r) has no positive zero before the effective MGF radius.
struct AdjustmentNotFound : NumericalError {
  using NumericalError::NumericalError;
};

// Inner retention solve called below its threshold ln(1+θ)/r.
struct ThresholdViolation : NumericalError {
  using NumericalError::NumericalError;
};

// A hypothesis required by a bound construction fails (e.g. divergent
// excess-moment supremum).
struct ConditionViolated : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace ruinopt
