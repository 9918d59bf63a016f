#include "ulf/scenario.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace ulf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MatrixXd ncv_process_noise(double q, double dt) {
    MatrixXd cov = MatrixXd::Zero(4, 4);
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    cov(0, 0) = cov(1, 1) = q * dt3 / 3.0;
    cov(2, 2) = cov(3, 3) = q * dt;
    cov(0, 2) = cov(2, 0) = q * dt2 / 2.0;
    cov(1, 3) = cov(3, 1) = q * dt2 / 2.0;
    return cov;
}

MatrixXd ct_process_noise(double q, double turn_rate_psd, double dt) {
    MatrixXd cov = MatrixXd::Zero(5, 5);
    cov.topLeftCorner(4, 4) = ncv_process_noise(q, dt);
    cov(4, 4) = turn_rate_psd * dt;
    return cov;
}

// PSD square root for sampling; tolerates singular covariances.
MatrixXd psd_sqrt(const MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(cov));
    if (es.info() != Eigen::Success) {
        throw FactorizationFailed("psd_sqrt: eigendecomposition failed");
    }
    const VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal();
}

struct SensorLayout {
    int offset;  // row offset into the stacked measurement
    int dim;
};

int sensor_dim(const Sensor& sensor) {
    if (std::holds_alternative<RangeBearingSensor>(sensor.kind)) return 2;
    if (std::holds_alternative<RangeOnlySensor>(sensor.kind)) return 1;
    return 2;  // position sensor
}

void eval_sensor(const Sensor& sensor, const VectorXd& state, double* out) {
    const double dx = state(0) - sensor.position(0);
    const double dy = state(1) - sensor.position(1);
    if (const auto* rb = std::get_if<RangeBearingSensor>(&sensor.kind)) {
        (void)rb;
        const double range = std::hypot(dx, dy);
        if (range < 1e-9) {
            throw AtSensorSingularity("range-bearing sensor evaluated at the sensor position");
        }
        out[0] = range;
        out[1] = std::atan2(dy, dx);
    } else if (std::holds_alternative<RangeOnlySensor>(sensor.kind)) {
        out[0] = std::hypot(dx, dy);
    } else {
        out[0] = state(0);
        out[1] = state(1);
    }
}

void sensor_jacobian(const Sensor& sensor, const VectorXd& state, Eigen::Ref<MatrixXd> rows) {
    const double dx = state(0) - sensor.position(0);
    const double dy = state(1) - sensor.position(1);
    rows.setZero();
    if (std::holds_alternative<RangeBearingSensor>(sensor.kind)) {
        const double r2 = dx * dx + dy * dy;
        const double range = std::sqrt(r2);
        if (range < 1e-9) {
            throw AtSensorSingularity("range-bearing Jacobian evaluated at the sensor position");
        }
        rows(0, 0) = dx / range;
        rows(0, 1) = dy / range;
        rows(1, 0) = -dy / r2;
        rows(1, 1) = dx / r2;
    } else if (std::holds_alternative<RangeOnlySensor>(sensor.kind)) {
        const double range = std::hypot(dx, dy);
        if (range < 1e-9) {
            throw AtSensorSingularity("range sensor Jacobian evaluated at the sensor position");
        }
        rows(0, 0) = dx / range;
        rows(0, 1) = dy / range;
    } else {
        rows(0, 0) = 1.0;
        rows(1, 1) = 1.0;
    }
}

void sensor_noise(const Sensor& sensor, Eigen::Ref<MatrixXd> block) {
    if (const auto* rb = std::get_if<RangeBearingSensor>(&sensor.kind)) {
        block(0, 0) = rb->sigma_range * rb->sigma_range;
        block(1, 1) = rb->sigma_bearing * rb->sigma_bearing;
    } else if (const auto* ro = std::get_if<RangeOnlySensor>(&sensor.kind)) {
        block(0, 0) = ro->sigma_range * ro->sigma_range;
    } else {
        const auto& pos = std::get<PositionSensor>(sensor.kind);
        block(0, 0) = block(1, 1) = pos.sigma * pos.sigma;
    }
}

bool sensor_row_is_angle(const Sensor& sensor, int row) {
    return std::holds_alternative<RangeBearingSensor>(sensor.kind) && row == 1;
}

}  // namespace

int state_dim(const DynamicsSpec& dynamics) {
    return std::holds_alternative<NearlyConstantVelocity>(dynamics) ? 4 : 5;
}

int measurement_dim(const Scenario& scenario) {
    int total = 0;
    for (const Sensor& s : scenario.sensors) total += sensor_dim(s);
    return total;
}

void validate(const Scenario& scenario) {
    if (scenario.n_steps < 1) throw InvalidArgument("scenario.n_steps must be >= 1");
    if (!(scenario.dt > 0.0)) throw InvalidArgument("scenario.dt must be > 0");
    if (scenario.sensors.empty()) throw InvalidArgument("scenario.sensors must be non-empty");
    std::visit(
        [](const auto& dyn) {
            if (dyn.accel_psd < 0.0) throw InvalidArgument("scenario.dynamics.q must be >= 0");
        },
        scenario.dynamics);
    if (const auto* ct = std::get_if<CoordinatedTurn>(&scenario.dynamics)) {
        if (ct->turn_rate_psd < 0.0) {
            throw InvalidArgument("scenario.dynamics.turn_rate_noise must be >= 0");
        }
    }
    for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
        const bool ok = std::visit(
            [](const auto& kind) {
                using T = std::decay_t<decltype(kind)>;
                if constexpr (std::is_same_v<T, RangeBearingSensor>) {
                    return kind.sigma_range >= 0.0 && kind.sigma_bearing >= 0.0;
                } else if constexpr (std::is_same_v<T, RangeOnlySensor>) {
                    return kind.sigma_range >= 0.0;
                } else {
                    return kind.sigma >= 0.0;
                }
            },
            scenario.sensors[i].kind);
        if (!ok) {
            std::ostringstream os;
            os << "scenario.sensors[" << i << "]: noise sigmas must be >= 0";
            throw InvalidArgument(os.str());
        }
    }
    const int n = state_dim(scenario.dynamics);
    if (scenario.init_truth.dim() != n) {
        throw InvalidArgument("scenario.init_truth dimension must match the dynamics state dim");
    }
    if (scenario.init_filter.dim() != n) {
        throw InvalidArgument("scenario.init_filter dimension must match the dynamics state dim");
    }
}

Scenario default_scenario() {
    Scenario sc;
    sc.n_steps = 50;
    sc.dt = 1.0;
    sc.dynamics = NearlyConstantVelocity{0.1};
    sc.sensors = {Sensor{Eigen::Vector2d::Zero(), RangeBearingSensor{1.0, 0.1}}};
    // Start ~18 m out with a trajectory that passes within a few meters of
    // the sensor; the close pass plus the large bearing noise is what
    // separates the filter classes.
    VectorXd mean(4);
    mean << 15.0, 10.0, -1.0, -0.5;
    VectorXd diag(4);
    diag << 100.0, 100.0, 1.0, 1.0;
    const MatrixXd cov = diag.asDiagonal();
    sc.init_truth = make_gaussian(mean, cov);
    sc.init_filter = make_gaussian(mean, cov);
    return sc;
}

double wrap_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -std::numbers::pi) r += kTwoPi;
    return r;
}

NonlinearModel dynamics_model(const DynamicsSpec& dynamics, double dt) {
    if (const auto* ncv = std::get_if<NearlyConstantVelocity>(&dynamics)) {
        MatrixXd f = MatrixXd::Identity(4, 4);
        f(0, 2) = f(1, 3) = dt;
        auto func = [f](const VectorXd& x) -> VectorXd { return f * x; };
        auto jac = [f](const VectorXd&) -> MatrixXd { return f; };
        return make_nonlinear(func, jac, ncv_process_noise(ncv->accel_psd, dt), 4, 4);
    }

    const auto& ct = std::get<CoordinatedTurn>(dynamics);
    auto func = [dt](const VectorXd& x) -> VectorXd {
        const double vx = x(2), vy = x(3), w = x(4);
        const double wt = w * dt;
        const double s = std::sin(wt), c = std::cos(wt);
        double sw, cw;  // sin(w dt)/w and (1 - cos(w dt))/w
        if (std::abs(wt) > 1e-6) {
            const double half = std::sin(0.5 * wt);
            const double omc = 2.0 * half * half;  // 1 - cos without cancellation
            sw = s / w;
            cw = omc / w;
        } else {
            sw = dt - wt * wt * dt / 6.0;
            cw = wt * dt / 2.0 - wt * wt * wt * dt / 24.0;
        }
        VectorXd out(5);
        out(0) = x(0) + vx * sw - vy * cw;
        out(1) = x(1) + vx * cw + vy * sw;
        out(2) = vx * c - vy * s;
        out(3) = vx * s + vy * c;
        out(4) = w;
        return out;
    };
    auto jac = [dt](const VectorXd& x) -> MatrixXd {
        const double vx = x(2), vy = x(3), w = x(4);
        const double wt = w * dt;
        const double s = std::sin(wt), c = std::cos(wt);
        double sw, cw, dsw, dcw;  // d(sw)/dw and d(cw)/dw
        if (std::abs(wt) > 1e-6) {
            const double half = std::sin(0.5 * wt);
            const double omc = 2.0 * half * half;
            sw = s / w;
            cw = omc / w;
            dsw = (wt * c - s) / (w * w);
            dcw = (wt * s - omc) / (w * w);
        } else {
            sw = dt - wt * wt * dt / 6.0;
            cw = wt * dt / 2.0 - wt * wt * wt * dt / 24.0;
            dsw = -wt * dt * dt / 3.0;
            dcw = dt * dt / 2.0 - wt * wt * dt * dt / 8.0;
        }
        MatrixXd jm = MatrixXd::Zero(5, 5);
        jm(0, 0) = 1.0;
        jm(0, 2) = sw;
        jm(0, 3) = -cw;
        jm(0, 4) = vx * dsw - vy * dcw;
        jm(1, 1) = 1.0;
        jm(1, 2) = cw;
        jm(1, 3) = sw;
        jm(1, 4) = vx * dcw + vy * dsw;
        jm(2, 2) = c;
        jm(2, 3) = -s;
        jm(2, 4) = (-vx * s - vy * c) * dt;
        jm(3, 2) = s;
        jm(3, 3) = c;
        jm(3, 4) = (vx * c - vy * s) * dt;
        jm(4, 4) = 1.0;
        return jm;
    };
    return make_nonlinear(func, jac, ct_process_noise(ct.accel_psd, ct.turn_rate_psd, dt), 5, 5);
}

NonlinearModel range_bearing_model(const Eigen::Vector2d& sensor_pos, double sigma_range,
                                   double sigma_bearing, int state_dimension) {
    Scenario tmp;
    tmp.dynamics = state_dimension == 5 ? DynamicsSpec{CoordinatedTurn{}}
                                        : DynamicsSpec{NearlyConstantVelocity{}};
    tmp.sensors = {Sensor{sensor_pos, RangeBearingSensor{sigma_range, sigma_bearing}}};
    return measurement_model(tmp);
}

NonlinearModel measurement_model(const Scenario& scenario) {
    const int n = state_dim(scenario.dynamics);
    const int m = measurement_dim(scenario);
    const std::vector<Sensor> sensors = scenario.sensors;

    std::vector<SensorLayout> layout;
    layout.reserve(sensors.size());
    int offset = 0;
    for (const Sensor& s : sensors) {
        layout.push_back({offset, sensor_dim(s)});
        offset += sensor_dim(s);
    }

    auto func = [sensors, layout, m](const VectorXd& x) -> VectorXd {
        VectorXd out(m);
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            eval_sensor(sensors[i], x, out.data() + layout[i].offset);
        }
        return out;
    };
    auto jac = [sensors, layout, m, n](const VectorXd& x) -> MatrixXd {
        MatrixXd jm(m, n);
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            sensor_jacobian(sensors[i], x, jm.middleRows(layout[i].offset, layout[i].dim));
        }
        return jm;
    };
    auto wrap = [sensors, layout](const VectorXd& r) -> VectorXd {
        VectorXd out = r;
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            for (int row = 0; row < layout[i].dim; ++row) {
                if (sensor_row_is_angle(sensors[i], row)) {
                    out(layout[i].offset + row) = wrap_angle(out(layout[i].offset + row));
                }
            }
        }
        return out;
    };

    MatrixXd noise = MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        sensor_noise(sensors[i], noise.block(layout[i].offset, layout[i].offset, layout[i].dim,
                                             layout[i].dim));
    }
    return make_nonlinear(func, jac, noise, n, m, wrap);
}

SimulationResult simulate(const Scenario& scenario, std::uint64_t seed) {
    validate(scenario);
    const int n = state_dim(scenario.dynamics);
    const int m = measurement_dim(scenario);
    const NonlinearModel dyn = dynamics_model(scenario.dynamics, scenario.dt);
    const NonlinearModel meas = measurement_model(scenario);

    const MatrixXd init_sqrt = psd_sqrt(scenario.init_truth.cov);
    const MatrixXd process_sqrt = psd_sqrt(dyn.noise_cov);
    const MatrixXd meas_sqrt = psd_sqrt(meas.noise_cov);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&rng, &normal](Eigen::Index len) {
        VectorXd z(len);
        for (Eigen::Index i = 0; i < len; ++i) z(i) = normal(rng);
        return z;
    };

    SimulationResult result;
    result.truth.reserve(scenario.n_steps);
    result.measurements.reserve(scenario.n_steps);

    VectorXd state = scenario.init_truth.mean + init_sqrt * draw(n);
    for (int k = 0; k < scenario.n_steps; ++k) {
        state = dyn.func(state) + process_sqrt * draw(n);
        VectorXd y = meas.func(state) + meas_sqrt * draw(m);
        y = meas.wrap_residual(y);  // wraps exactly the angle components
        result.truth.push_back(state);
        result.measurements.push_back(std::move(y));
    }
    return result;
}

}  // namespace ulf
