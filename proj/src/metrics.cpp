#include "ulf/metrics.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace ulf {

RunMetrics metrics(const std::vector<VectorXd>& truth, const std::vector<StepRecord>& records) {
    if (truth.size() != records.size()) {
        throw DimensionMismatch("metrics: truth and record sequences differ in length");
    }
    const std::size_t steps = records.size();
    RunMetrics out;
    out.nees_seq.resize(static_cast<Eigen::Index>(steps));
    out.nis_seq.resize(static_cast<Eigen::Index>(steps));

    double pos_sq = 0.0;
    double state_sq = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const VectorXd err = records[k].posterior.mean - truth[k];
        pos_sq += err.head(2).squaredNorm();
        state_sq += err.squaredNorm();

        Eigen::LLT<MatrixXd> llt_p(records[k].posterior.cov);
        if (llt_p.info() != Eigen::Success) {
            throw SingularCovariance("metrics: posterior covariance not PD");
        }
        out.nees_seq(static_cast<Eigen::Index>(k)) = err.dot(llt_p.solve(err));

        Eigen::LLT<MatrixXd> llt_s(records[k].innovation_cov);
        if (llt_s.info() != Eigen::Success) {
            throw SingularCovariance("metrics: innovation covariance not PD");
        }
        out.nis_seq(static_cast<Eigen::Index>(k)) =
            records[k].innovation.dot(llt_s.solve(records[k].innovation));
    }
    const double denom = steps == 0 ? 1.0 : static_cast<double>(steps);
    out.rmse_pos = std::sqrt(pos_sq / denom);
    out.rmse_state = std::sqrt(state_sq / denom);
    return out;
}

}  // namespace ulf
