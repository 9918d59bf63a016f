#ifndef ULF_ERRORS_HPP
#define ULF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ulf {

// Base class for every error raised by the library. Specific subclasses
// exist so callers (and tests) can react to individual failure modes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Covariance fails the PSD floor; signals a modeling error or numerical
// blow-up upstream.
struct NotPositiveSemiDefinite : Error {
    using Error::Error;
};

// Cholesky failed even at the jitter cap; caller should abort the run.
struct FactorizationFailed : Error {
    using Error::Error;
};

struct JacobianUnavailable : Error {
    using Error::Error;
};

struct NonFiniteOutput : Error {
    using Error::Error;
};

// Expansion density covariance is not positive definite.
struct SingularDensity : Error {
    using Error::Error;
};

// Innovation covariance S is not positive definite.
struct SingularInnovation : Error {
    using Error::Error;
};

// Predicted covariance in the smoothing step is not positive definite.
struct SingularPrediction : Error {
    using Error::Error;
};

// A statistical linearizer was handed a bare point instead of a density.
struct PointRequiresAnalytical : Error {
    using Error::Error;
};

struct DivergedNonFinite : Error {
    using Error::Error;
};

struct UnknownFilterName : Error {
    using Error::Error;
};

// Range ~0 makes the bearing undefined.
struct AtSensorSingularity : Error {
    using Error::Error;
};

struct SingularCovariance : Error {
    using Error::Error;
};

struct MissingResults : Error {
    using Error::Error;
};

// Invalid configuration value (quadrature rule, scenario, filter config).
struct InvalidArgument : Error {
    using Error::Error;
};

}  // namespace ulf

#endif  // ULF_ERRORS_HPP
