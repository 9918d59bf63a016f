#ifndef ULF_METRICS_HPP
#define ULF_METRICS_HPP

#include <vector>

#include "ulf/unified.hpp"

namespace ulf {

struct RunMetrics {
    double rmse_pos = 0.0;    // RMSE over the position components
    double rmse_state = 0.0;  // RMSE over the full state
    VectorXd nees_seq;        // e^T P^-1 e per step
    VectorXd nis_seq;         // v^T S^-1 v per step
};

/// Accuracy/consistency metrics for one filtered run against the truth.
/// Position components are the first two states.
RunMetrics metrics(const std::vector<VectorXd>& truth, const std::vector<StepRecord>& records);

}  // namespace ulf

#endif  // ULF_METRICS_HPP
