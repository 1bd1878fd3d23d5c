#pragma once

#include <optional>

#include "conetrack/geometry.hpp"

namespace conetrack {

/// Car state in the global frame. Velocities are body-frame.
struct VehicleState {
    double pos_x = 0.0;
    double pos_y = 0.0;
    double yaw = 0.0;
    double vel_long = 0.0;
    double vel_lat = 0.0;
    double yaw_rate = 0.0;
    double steer_angle = 0.0;

    Pose2 pose() const { return {pos_x, pos_y, yaw}; }
    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// Single-track vehicle parameters. Defaults describe a small formula-student car.
struct VehicleParams {
    double mass = 190.0;
    double yaw_inertia = 110.0;
    double wheelbase = 1.55;
    double dist_cg_front = 0.775;
    double dist_cg_rear = 0.775;
    double track_width = 1.2;
    double pacejka_B = 10.0;
    double pacejka_C = 1.9;
    /// Peak friction coefficient; peak axle force is pacejka_D times the axle normal load.
    double pacejka_D = 1.0;
    double pacejka_E = 0.97;
    double drag_coeff = 0.5;
    double max_drive_force = 2000.0;
    double steer_limit = deg_to_rad(18.0);
    std::optional<double> steer_rate_limit = deg_to_rad(112.5);
    double steer_full_scale = deg_to_rad(45.0);
    /// Integration sub-step; the tyre dynamics are far stiffer than a 0.1 s control period.
    double max_substep = 0.005;
    /// Below blend_speed_low the kinematic model is used, above blend_speed_high the dynamic one.
    double blend_speed_low = 1.0;
    double blend_speed_high = 2.0;
    double gravity = 9.81;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

struct ControlCommand {
    double steer_normalized = 0.0;
    double throttle_normalized = 0.0;

    ControlCommand() = default;
    ControlCommand(double steer, double throttle);
};

struct SpeedControllerConfig {
    double target_speed = 4.0;
    double kp = 1.0;
};

double denormalize_steering(double u, const VehicleParams& params);

/// Inverse of the linear part of denormalize_steering (no saturation).
double normalize_steering(double angle, const VehicleParams& params);

double apply_steer_rate_limit(double prev, double desired, double dt, std::optional<double> rate);

double speed_control(double current_speed, const SpeedControllerConfig& cfg);

/// Magic-formula lateral force for a unit-friction tyre carrying `normal_load` newtons.
double pacejka_lateral_force(double slip_angle, const VehicleParams& params, double normal_load = 1.0);

/// Slip angle of peak lateral force, from the stationarity condition of the magic formula.
double pacejka_peak_slip(const VehicleParams& params);

/// Advances the vehicle by one control period `dt`.
///
/// The steering command is first converted to an angle (saturated at steer_limit) and then
/// rate-limited against the previous angle over the whole period. The chassis is then
/// integrated with forward-Euler sub-steps of at most `max_substep` seconds, blending the
/// kinematic and dynamic bicycle models at low speed.
///
/// Throws NonFiniteState if the result contains NaN or Inf.
VehicleState step_dynamics(const VehicleState& state, const ControlCommand& cmd,
                           const VehicleParams& params, double dt);

/// Mirror image about the global x-axis.
VehicleState mirror_state(const VehicleState& state);

} // namespace conetrack
