#include "ulf/kalman.hpp"

#include <Eigen/Cholesky>
#include <cassert>

namespace ulf {

GaussianDensity time_update(const GaussianDensity& posterior, const AffineModel& dyn,
                            const MatrixXd& process_noise) {
    return marginal_of_affine(posterior, dyn, process_noise);
}

MeasurementUpdate measurement_update(const GaussianDensity& prior, const AffineModel& meas,
                                     const MatrixXd& meas_noise, const VectorXd& y) {
    const Eigen::Index n = prior.dim();
    const Eigen::Index m = meas.out_dim();
    if (meas.in_dim() != n || y.size() != m || meas_noise.rows() != m || meas_noise.cols() != m) {
        throw DimensionMismatch("measurement_update: inconsistent dimensions");
    }

    const MatrixXd& a = meas.slope;
    const MatrixXd noise_total = meas_noise + meas.lin_err_cov;
    const MatrixXd innovation_cov = symmetrized(a * prior.cov * a.transpose() + noise_total);

    Eigen::LLT<MatrixXd> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
        throw SingularInnovation("measurement_update: innovation covariance not PD");
    }
    // K = P A^T S^-1  <=>  K^T = S^-1 A P
    const MatrixXd gain = llt.solve(a * prior.cov).transpose();

    const VectorXd innovation = y - a * prior.mean - meas.offset;
    const VectorXd mean = prior.mean + gain * innovation;

    const MatrixXd closed = MatrixXd::Identity(n, n) - gain * a;
    const MatrixXd cov =
        closed * prior.cov * closed.transpose() + gain * noise_total * gain.transpose();

    MeasurementUpdate out;
    out.posterior = make_gaussian(mean, cov);
    out.gain = KalmanGain{gain};
    out.innovation = innovation;
    out.innovation_cov = innovation_cov;
    return out;
}

SmoothingResult smoothing_step(const GaussianDensity& filtered, const GaussianDensity& predicted_next,
                               const GaussianDensity& smoothed_next, const AffineModel& dyn,
                               const MatrixXd& process_noise) {
    const Eigen::Index n = filtered.dim();
    if (dyn.in_dim() != n || dyn.out_dim() != n || predicted_next.dim() != n ||
        smoothed_next.dim() != n) {
        throw DimensionMismatch("smoothing_step: inconsistent dimensions");
    }

    const MatrixXd& a = dyn.slope;
    const MatrixXd predicted_cov =
        symmetrized(a * filtered.cov * a.transpose() + process_noise + dyn.lin_err_cov);

#ifndef NDEBUG
    assert((predicted_cov - predicted_next.cov).lpNorm<Eigen::Infinity>() <=
               1e-8 * (1.0 + predicted_next.cov.lpNorm<Eigen::Infinity>()) &&
           "smoothing_step: predicted density inconsistent with time_update");
    assert((a * filtered.mean + dyn.offset - predicted_next.mean).lpNorm<Eigen::Infinity>() <=
               1e-8 * (1.0 + predicted_next.mean.lpNorm<Eigen::Infinity>()) &&
           "smoothing_step: predicted mean inconsistent with time_update");
#endif

    Eigen::LLT<MatrixXd> llt(predicted_cov);
    if (llt.info() != Eigen::Success) {
        throw SingularPrediction("smoothing_step: predicted covariance not PD");
    }
    // G = P_f A^T S^-1  <=>  G^T = S^-1 A P_f
    const MatrixXd gain = llt.solve(a * filtered.cov).transpose();

    const VectorXd mean = filtered.mean + gain * (smoothed_next.mean - predicted_next.mean);
    const MatrixXd cov =
        filtered.cov + gain * (smoothed_next.cov - predicted_cov) * gain.transpose();

    SmoothingResult out;
    out.smoothed = make_gaussian(mean, cov);
    out.gain = SmootherGain{gain};
    return out;
}

}  // namespace ulf
