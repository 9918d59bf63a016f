#ifndef ULF_UNIFIED_HPP
#define ULF_UNIFIED_HPP

#include <string>
#include <utility>
#include <vector>

#include "ulf/kalman.hpp"
#include "ulf/linearize.hpp"

namespace ulf {

enum class LinearizerKind { Analytical, Statistical };

/// Choice between Taylor linearization about a point and statistical
/// linearization w.r.t. a density.
struct Linearizer {
    LinearizerKind kind = LinearizerKind::Analytical;
    QuadratureRule rule{UnscentedRule{}};  // used when Statistical

    static Linearizer analytical() { return {LinearizerKind::Analytical, {UnscentedRule{}}}; }
    static Linearizer statistical(QuadratureRule r) {
        return {LinearizerKind::Statistical, std::move(r)};
    }
};

/// The three filter classes realized by the general algorithm:
///   Standard            one linearization + TU + MU per step
///   Iterated            re-linearize the measurement about posterior iterates
///   DynamicallyIterated additionally smooth the previous state and
///                       re-linearize the dynamics within the step
enum class FilterClass { Standard, Iterated, DynamicallyIterated };

struct IterationPolicy {
    FilterClass filter_class = FilterClass::Standard;
    int max_iters = 10;     // treated as 1 for Standard
    double tol = 1e-8;      // relative mean-change threshold
    double damping = 1.0;   // step scaling on the re-linearization point update
};

/// Diagnostic trace of one general-algorithm step.
struct StepRecord {
    GaussianDensity posterior;
    std::optional<GaussianDensity> smoothed_prev;  // present iff DynamicallyIterated
    int iterations_used = 1;
    bool converged = true;
    VectorXd innovation;
    MatrixXd innovation_cov;
    AffineModel lin_dyn;
    AffineModel lin_meas;
};

struct StepOptions {
    /// When set, a dynamically iterated step re-sources its final time update
    /// from the smoothed previous-state density, so the smoothed density
    /// propagates into subsequent time steps. Default keeps the filter
    /// strictly recursive.
    bool propagate_smoothed = false;
};

/// Dispatch dynamics linearization: Analytical uses the point (or the density
/// mean); Statistical requires a density.
AffineModel linearize_dynamics(const NonlinearModel& dyn_model, const LinearizationPoint& about,
                               const Linearizer& lin);

/// One step of the general algorithm: (re-)linearize dynamics and
/// measurement, run TU + MU, and iterate per the policy.
StepRecord general_step(const GaussianDensity& prev_posterior, const VectorXd& y,
                        const NonlinearModel& dyn, const NonlinearModel& meas,
                        const Linearizer& lin, const IterationPolicy& policy,
                        const StepOptions& options = {});

/// Fold general_step over a measurement sequence. The first failing step
/// aborts the run; divergence errors carry the step index.
std::vector<StepRecord> run_filter(const GaussianDensity& init,
                                   const std::vector<VectorXd>& measurements,
                                   const NonlinearModel& dyn, const NonlinearModel& meas,
                                   const Linearizer& lin, const IterationPolicy& policy,
                                   const StepOptions& options = {});

/// Per-time best densities: the filtered posteriors, with entry k-1
/// overwritten by step k's smoothed density for dynamically iterated runs.
/// The recursion itself always consumes the filtered posteriors.
std::vector<GaussianDensity> smoothed_timeline(const std::vector<StepRecord>& records);

/// Named filter configurations. Valid names: EKF, UKF, CKF, IEKF, IUKF,
/// IPLF, DIEKF, DIUKF, DIPLF.
std::pair<Linearizer, IterationPolicy> filter_zoo(const std::string& name);

/// The nine zoo names in canonical order.
const std::vector<std::string>& zoo_names();

const char* to_string(LinearizerKind kind);
const char* to_string(FilterClass filter_class);

}  // namespace ulf

#endif  // ULF_UNIFIED_HPP
