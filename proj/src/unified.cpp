#include "ulf/unified.hpp"

#include <cmath>
#include <sstream>

namespace ulf {

namespace {

void ensure_finite_iterate(const GaussianDensity& d, int iteration) {
    if (!d.mean.allFinite() || !d.cov.allFinite()) {
        std::ostringstream os;
        os << "general_step: non-finite iterate at iteration " << iteration;
        throw DivergedNonFinite(os.str());
    }
}

// MU with the model's residual wrap applied to the innovation: the observed
// vector is shifted so that the affine update sees the wrapped residual.
MeasurementUpdate update_with_wrap(const GaussianDensity& prior, const AffineModel& lin_meas,
                                   const NonlinearModel& meas, const VectorXd& y) {
    if (!meas.residual_wrap) {
        return measurement_update(prior, lin_meas, meas.noise_cov, y);
    }
    const VectorXd predicted = lin_meas.slope * prior.mean + lin_meas.offset;
    const VectorXd residual = meas.residual_wrap(y - predicted);
    return measurement_update(prior, lin_meas, meas.noise_cov, predicted + residual);
}

}  // namespace

AffineModel linearize_dynamics(const NonlinearModel& dyn_model, const LinearizationPoint& about,
                               const Linearizer& lin) {
    if (lin.kind == LinearizerKind::Analytical) {
        return linearize_analytical(dyn_model, about.mean());
    }
    if (!about.is_density()) {
        throw PointRequiresAnalytical(
            "linearize_dynamics: statistical linearization needs a density, got a bare point");
    }
    return linearize_statistical(dyn_model, about.density(), lin.rule);
}

StepRecord general_step(const GaussianDensity& prev_posterior, const VectorXd& y,
                        const NonlinearModel& dyn, const NonlinearModel& meas,
                        const Linearizer& lin, const IterationPolicy& policy,
                        const StepOptions& options) {
    if (prev_posterior.dim() != dyn.input_dim || dyn.output_dim != dyn.input_dim) {
        throw DimensionMismatch("general_step: dynamics dims vs state dim");
    }
    if (meas.input_dim != dyn.output_dim || y.size() != meas.output_dim) {
        throw DimensionMismatch("general_step: measurement dims vs state/observation");
    }

    auto relinearize = [&lin](const NonlinearModel& model, const VectorXd& mean,
                              const MatrixXd& cov) {
        if (lin.kind == LinearizerKind::Analytical) return linearize_analytical(model, mean);
        return linearize_statistical(model, make_gaussian(mean, cov), lin.rule);
    };

    AffineModel lin_dyn =
        linearize_dynamics(dyn, LinearizationPoint::at_density(prev_posterior), lin);
    GaussianDensity prior = time_update(prev_posterior, lin_dyn, dyn.noise_cov);
    AffineModel lin_meas = relinearize(meas, prior.mean, prior.cov);
    MeasurementUpdate mu = update_with_wrap(prior, lin_meas, meas, y);
    GaussianDensity iterate = mu.posterior;
    ensure_finite_iterate(iterate, 0);

    const bool standard = policy.filter_class == FilterClass::Standard;
    const int max_iters = standard ? 1 : std::max(1, policy.max_iters);

    int iterations_used = 1;
    bool converged = true;
    std::optional<GaussianDensity> smoothed_prev;

    if (max_iters > 1) {
        converged = false;
        VectorXd meas_point = prior.mean;
        VectorXd dyn_point = prev_posterior.mean;
        for (int i = 1; i < max_iters; ++i) {
            if (policy.filter_class == FilterClass::DynamicallyIterated) {
                SmoothingResult sm =
                    smoothing_step(prev_posterior, prior, iterate, lin_dyn, dyn.noise_cov);
                smoothed_prev = sm.smoothed;
                dyn_point += policy.damping * (sm.smoothed.mean - dyn_point);
                lin_dyn = relinearize(dyn, dyn_point, sm.smoothed.cov);
                prior = time_update(prev_posterior, lin_dyn, dyn.noise_cov);
            }
            meas_point += policy.damping * (iterate.mean - meas_point);
            lin_meas = relinearize(meas, meas_point, iterate.cov);
            mu = update_with_wrap(prior, lin_meas, meas, y);
            ensure_finite_iterate(mu.posterior, i);

            const double delta = (mu.posterior.mean - iterate.mean).norm();
            const double scale = std::max(1.0, mu.posterior.mean.norm());
            iterate = mu.posterior;
            if (delta < policy.tol * scale) {
                iterations_used = i;
                converged = true;
                break;
            }
        }
        if (!converged) iterations_used = max_iters;
    }

    if (policy.filter_class == FilterClass::DynamicallyIterated) {
        // Recompute the smoothed previous state against the final
        // linearization so the record is self-consistent.
        SmoothingResult sm = smoothing_step(prev_posterior, prior, iterate, lin_dyn, dyn.noise_cov);
        smoothed_prev = sm.smoothed;
        if (options.propagate_smoothed) {
            prior = time_update(*smoothed_prev, lin_dyn, dyn.noise_cov);
            mu = update_with_wrap(prior, lin_meas, meas, y);
            iterate = mu.posterior;
            ensure_finite_iterate(iterate, iterations_used);
        }
    }

    StepRecord record;
    record.posterior = std::move(iterate);
    record.smoothed_prev = std::move(smoothed_prev);
    record.iterations_used = iterations_used;
    record.converged = converged;
    record.innovation = mu.innovation;
    record.innovation_cov = mu.innovation_cov;
    record.lin_dyn = std::move(lin_dyn);
    record.lin_meas = std::move(lin_meas);
    return record;
}

std::vector<StepRecord> run_filter(const GaussianDensity& init,
                                   const std::vector<VectorXd>& measurements,
                                   const NonlinearModel& dyn, const NonlinearModel& meas,
                                   const Linearizer& lin, const IterationPolicy& policy,
                                   const StepOptions& options) {
    std::vector<StepRecord> records;
    records.reserve(measurements.size());
    const GaussianDensity* current = &init;
    for (std::size_t k = 0; k < measurements.size(); ++k) {
        try {
            records.push_back(general_step(*current, measurements[k], dyn, meas, lin, policy,
                                           options));
        } catch (const DivergedNonFinite& e) {
            std::ostringstream os;
            os << "run_filter: step " << k << ": " << e.what();
            throw DivergedNonFinite(os.str());
        }
        current = &records.back().posterior;
    }
    return records;
}

std::vector<GaussianDensity> smoothed_timeline(const std::vector<StepRecord>& records) {
    std::vector<GaussianDensity> timeline;
    timeline.reserve(records.size());
    for (const StepRecord& rec : records) timeline.push_back(rec.posterior);
    for (std::size_t k = 1; k < records.size(); ++k) {
        if (records[k].smoothed_prev) timeline[k - 1] = *records[k].smoothed_prev;
    }
    return timeline;
}

const std::vector<std::string>& zoo_names() {
    static const std::vector<std::string> names = {"EKF",  "UKF",  "CKF",   "IEKF", "IUKF",
                                                   "IPLF", "DIEKF", "DIUKF", "DIPLF"};
    return names;
}

std::pair<Linearizer, IterationPolicy> filter_zoo(const std::string& name) {
    IterationPolicy standard{FilterClass::Standard, 1, 1e-8, 1.0};
    IterationPolicy iterated{FilterClass::Iterated, 10, 1e-8, 1.0};
    IterationPolicy dynamic{FilterClass::DynamicallyIterated, 10, 1e-8, 1.0};
    const Linearizer analytic = Linearizer::analytical();
    const Linearizer unscented = Linearizer::statistical(QuadratureRule::unscented());
    const Linearizer cubature = Linearizer::statistical(QuadratureRule::cubature());

    if (name == "EKF") return {analytic, standard};
    if (name == "UKF") return {unscented, standard};
    if (name == "CKF") return {cubature, standard};
    if (name == "IEKF") return {analytic, iterated};
    if (name == "IUKF" || name == "IPLF") return {unscented, iterated};
    if (name == "DIEKF") return {analytic, dynamic};
    if (name == "DIUKF" || name == "DIPLF") return {unscented, dynamic};
    throw UnknownFilterName("filter_zoo: unknown filter name '" + name + "'");
}

const char* to_string(LinearizerKind kind) {
    return kind == LinearizerKind::Analytical ? "Analytical" : "Statistical";
}

const char* to_string(FilterClass filter_class) {
    switch (filter_class) {
        case FilterClass::Standard: return "Standard";
        case FilterClass::Iterated: return "Iterated";
        default: return "DynamicallyIterated";
    }
}

}  // namespace ulf
