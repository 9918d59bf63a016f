#ifndef ULF_KALMAN_HPP
#define ULF_KALMAN_HPP

#include "ulf/gaussian.hpp"

namespace ulf {

struct KalmanGain {
    MatrixXd gain;  // n x m
};

struct SmootherGain {
    MatrixXd gain;  // n x n
};

/// Everything the measurement update produces. Innovation statistics are
/// returned so NIS/NEES diagnostics never redo the Cholesky solve.
struct MeasurementUpdate {
    GaussianDensity posterior;
    KalmanGain gain;
    VectorXd innovation;
    MatrixXd innovation_cov;  // S = A P A^T + R + Omega
};

struct SmoothingResult {
    GaussianDensity smoothed;
    SmootherGain gain;
};

/// Time update: x = A_f x + b_f, P = A_f P A_f^T + Q + Omega_f.
GaussianDensity time_update(const GaussianDensity& posterior, const AffineModel& dyn,
                            const MatrixXd& process_noise);

/// Measurement update with the Joseph-form covariance
/// (I - K A) P (I - K A)^T + K (R + Omega) K^T; algebraically equal to
/// P - K A P. K is solved from S by Cholesky, never by explicit inverse.
MeasurementUpdate measurement_update(const GaussianDensity& prior, const AffineModel& meas,
                                     const MatrixXd& meas_noise, const VectorXd& y);

/// Smoothing step: G = P_f A_f^T (A_f P_f A_f^T + Q + Omega_f)^-1,
/// mean += G (smoothed_next_mean - predicted_mean),
/// cov  += G (smoothed_next_cov - predicted_cov) G^T.
/// predicted_next must be consistent with time_update(filtered, dyn, Q);
/// asserted in debug builds.
SmoothingResult smoothing_step(const GaussianDensity& filtered, const GaussianDensity& predicted_next,
                               const GaussianDensity& smoothed_next, const AffineModel& dyn,
                               const MatrixXd& process_noise);

}  // namespace ulf

#endif  // ULF_KALMAN_HPP
