#ifndef ULF_SCENARIO_HPP
#define ULF_SCENARIO_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "ulf/gaussian.hpp"

namespace ulf {

/// White-acceleration model on [x, y, vx, vy]; q is the acceleration PSD.
struct NearlyConstantVelocity {
    double accel_psd = 0.1;
};

/// Coordinated turn with unknown rate on [x, y, vx, vy, omega].
struct CoordinatedTurn {
    double accel_psd = 0.1;
    double turn_rate_psd = 0.01;
};

using DynamicsSpec = std::variant<NearlyConstantVelocity, CoordinatedTurn>;

struct RangeBearingSensor {
    double sigma_range = 1.0;
    double sigma_bearing = 0.1;
};

struct RangeOnlySensor {
    double sigma_range = 1.0;
};

/// Direct linear observation of both position components; keeps the
/// benchmark able to express fully affine scenarios.
struct PositionSensor {
    double sigma = 1.0;
};

struct Sensor {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    std::variant<RangeBearingSensor, RangeOnlySensor, PositionSensor> kind;
};

struct Scenario {
    int n_steps = 50;
    double dt = 1.0;
    DynamicsSpec dynamics = NearlyConstantVelocity{};
    std::vector<Sensor> sensors;
    GaussianDensity init_truth;   // truth start is drawn from this per run
    GaussianDensity init_filter;  // filter initial density, used as-is
};

/// 4 for NCV, 5 for coordinated turn.
int state_dim(const DynamicsSpec& dynamics);

/// Total measurement dimension over all sensors.
int measurement_dim(const Scenario& scenario);

/// Throws InvalidArgument naming the offending field.
void validate(const Scenario& scenario);

/// The default desk-scale benchmark scenario: NCV, one range-bearing sensor
/// at the origin, sigma_r = 1 m, sigma_theta = 0.1 rad, 50 steps at 1 s.
Scenario default_scenario();

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// Discretized dynamics as a NonlinearModel (analytic Jacobian included).
NonlinearModel dynamics_model(const DynamicsSpec& dynamics, double dt);

/// Range-bearing sensor h(x) = [||p - s||, atan2(p_y - s_y, p_x - s_x)] on
/// the position components of x. Bearing residuals are wrapped by the model
/// adapter. Throws AtSensorSingularity when evaluated within 1e-9 of the
/// sensor.
NonlinearModel range_bearing_model(const Eigen::Vector2d& sensor_pos, double sigma_range,
                                   double sigma_bearing, int state_dimension);

/// All of the scenario's sensors stacked into one measurement model.
NonlinearModel measurement_model(const Scenario& scenario);

struct SimulationResult {
    std::vector<VectorXd> truth;         // length n_steps
    std::vector<VectorXd> measurements;  // length n_steps, bearing wrapped
};

/// Sample a trajectory and its measurements; deterministic under seed.
SimulationResult simulate(const Scenario& scenario, std::uint64_t seed);

}  // namespace ulf

#endif  // ULF_SCENARIO_HPP
