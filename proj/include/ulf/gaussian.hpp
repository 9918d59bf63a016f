#ifndef ULF_GAUSSIAN_HPP
#define ULF_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "ulf/errors.hpp"

namespace ulf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Gaussian density N(mean, cov). Construct through make_gaussian so the
/// covariance is symmetrized and checked against the PSD floor.
struct GaussianDensity {
    VectorXd mean;
    MatrixXd cov;

    Eigen::Index dim() const { return mean.size(); }
};

/// Affine map z = A x + b with linearization-error covariance Omega.
/// Omega adds to the corresponding noise covariance (Q + Omega_f, R + Omega_h).
struct AffineModel {
    MatrixXd slope;        // A, m x n
    VectorXd offset;       // b, m
    MatrixXd lin_err_cov;  // Omega, m x m symmetric PSD

    Eigen::Index in_dim() const { return slope.cols(); }
    Eigen::Index out_dim() const { return slope.rows(); }
};

/// Nonlinear map x -> g(x) with additive noise covariance (Q or R).
/// func must be pure: identical inputs give identical outputs.
/// residual_wrap, when set, normalizes measurement residuals (e.g. wraps
/// angle components); it is applied by the caller before the measurement
/// update, never by the linearizer.
struct NonlinearModel {
    std::function<VectorXd(const VectorXd&)> func;
    std::optional<std::function<MatrixXd(const VectorXd&)>> jacobian;
    MatrixXd noise_cov;
    Eigen::Index input_dim = 0;
    Eigen::Index output_dim = 0;
    std::function<VectorXd(const VectorXd&)> residual_wrap;  // optional

    VectorXd wrap_residual(const VectorXd& r) const {
        return residual_wrap ? residual_wrap(r) : r;
    }
};

/// Weighted point set carrying the quadrature approximation of statistical
/// expectations. Columns of points are the sample locations.
struct WeightedSampleSet {
    MatrixXd points;       // n x count
    VectorXd weights_mean; // sums to 1
    VectorXd weights_cov;

    Eigen::Index count() const { return points.cols(); }
};

/// Symmetrize in place: M <- (M + M^T)/2.
inline MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// PSD floor used everywhere: eigenvalues of an n x n covariance must be
/// >= -1e-9 * trace/n.
bool passes_psd_floor(const MatrixXd& sym, double scale = 1e-9);

/// Build a density with the covariance symmetrized; rejects dimension
/// mismatches and PSD-floor violations.
GaussianDensity make_gaussian(const VectorXd& mean, const MatrixXd& cov);

/// Build an affine model; Omega is symmetrized and PSD-checked.
AffineModel make_affine(const MatrixXd& slope, const VectorXd& offset, const MatrixXd& lin_err_cov);

/// Build a nonlinear model. noise_cov is symmetrized and PSD-checked.
NonlinearModel make_nonlinear(std::function<VectorXd(const VectorXd&)> func,
                              std::optional<std::function<MatrixXd(const VectorXd&)>> jacobian,
                              MatrixXd noise_cov, Eigen::Index input_dim, Eigen::Index output_dim,
                              std::function<VectorXd(const VectorXd&)> residual_wrap = {});

/// Lower-triangular L with L L^T = cov + jitter*I. Jitter starts at 0 and
/// escalates x10 from 1e-12*trace/n up to 1e-6*trace/n; throws
/// FactorizationFailed at the cap.
MatrixXd safe_cholesky(const MatrixXd& cov);

/// Push a density through an affine model and add noise:
/// mean = A x + b, cov = A P A^T + noise_cov + Omega.
GaussianDensity marginal_of_affine(const GaussianDensity& density, const AffineModel& model,
                                   const MatrixXd& noise_cov);

}  // namespace ulf

#endif  // ULF_GAUSSIAN_HPP
