#ifndef ULF_LINEARIZE_HPP
#define ULF_LINEARIZE_HPP

#include <cstdint>
#include <optional>
#include <variant>

#include "ulf/gaussian.hpp"

namespace ulf {

/// Expansion point for a linearization: either a bare point (analytical
/// only) or a Gaussian density.
struct LinearizationPoint {
    std::variant<VectorXd, GaussianDensity> value;

    static LinearizationPoint at_point(VectorXd x) { return {std::move(x)}; }
    static LinearizationPoint at_density(GaussianDensity d) { return {std::move(d)}; }

    bool is_density() const { return std::holds_alternative<GaussianDensity>(value); }
    const GaussianDensity& density() const { return std::get<GaussianDensity>(value); }
    const VectorXd& point() const { return std::get<VectorXd>(value); }
    /// The point itself, or the density mean.
    const VectorXd& mean() const { return is_density() ? density().mean : point(); }
};

/// Sigma-point / sampling rule for the statistical-linearization expectations.
struct UnscentedRule {
    double alpha = 1.0;
    double beta = 0.0;
    /// kappa; nullopt selects the 3-n heuristic at point-generation time.
    std::optional<double> kappa;
};

struct MonteCarloRule {
    std::int64_t sample_count = 1000;
    std::uint64_t seed = 0;
};

struct CubatureRule {};

struct QuadratureRule {
    std::variant<UnscentedRule, MonteCarloRule, CubatureRule> kind;

    static QuadratureRule unscented(double alpha = 1.0, double beta = 0.0,
                                    std::optional<double> kappa = std::nullopt);
    static QuadratureRule monte_carlo(std::int64_t sample_count, std::uint64_t seed);
    static QuadratureRule cubature() { return {CubatureRule{}}; }
};

/// Statistical-linearization moments: zbar = E[g(x)],
/// psi = E[(x - xhat)(g(x) - zbar)^T], phi = E[(g - zbar)(g - zbar)^T].
struct StatMoments {
    VectorXd zbar;  // m
    MatrixXd psi;   // n x m
    MatrixXd phi;   // m x m
};

/// Central-difference Jacobian, column j = (g(x+h e_j) - g(x-h e_j)) / (2h).
MatrixXd finite_diff_jacobian(const NonlinearModel& model, const VectorXd& at, double step);

/// Default step for finite differencing: 1e-6 * max(1, ||x||_inf).
double default_fd_step(const VectorXd& at);

/// First-order Taylor expansion about a point: A = dg/dx|_x, b = g(x) - A x,
/// Omega = 0. Falls back to central differences when no analytic Jacobian is
/// supplied (unless the fallback is disabled).
AffineModel linearize_analytical(const NonlinearModel& model, const VectorXd& at,
                                 bool allow_finite_diff = true);

/// Generate the rule's weighted points for a density.
WeightedSampleSet quadrature_points(const GaussianDensity& density, const QuadratureRule& rule);

/// Quadrature approximation of the statistical-linearization expectations.
StatMoments statistical_moments(const NonlinearModel& model, const GaussianDensity& density,
                                const QuadratureRule& rule);

/// Best affine fit of g w.r.t. the density: A = Psi^T P^-1, b = zbar - A xhat,
/// Omega = Phi - A P A^T projected to PSD. The input moments are taken from
/// the same quadrature sample, so affine maps are recovered exactly under
/// every rule.
AffineModel linearize_statistical(const NonlinearModel& model, const GaussianDensity& density,
                                  const QuadratureRule& rule);

}  // namespace ulf

#endif  // ULF_LINEARIZE_HPP
