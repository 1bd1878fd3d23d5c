#include "conetrack/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conetrack/errors.hpp"

namespace conetrack {

void VehicleParams::validate() const {
    const bool positive = mass > 0 && yaw_inertia > 0 && wheelbase > 0 && dist_cg_front > 0 &&
                          dist_cg_rear > 0 && track_width > 0 && pacejka_B > 0 && pacejka_C > 0 &&
                          pacejka_D > 0 && pacejka_E > 0 && drag_coeff > 0 && max_drive_force > 0 &&
                          steer_limit > 0 && steer_full_scale > 0 && max_substep > 0 && gravity > 0;
    if (!positive) {
        throw ConfigError("vehicle parameters must be strictly positive");
    }
    if (std::abs(wheelbase - (dist_cg_front + dist_cg_rear)) > 1e-9) {
        throw ConfigError("wheelbase must equal dist_cg_front + dist_cg_rear");
    }
    if (steer_limit > steer_full_scale + 1e-15) {
        throw ConfigError("steer_limit exceeds steer_full_scale");
    }
    if (steer_rate_limit && *steer_rate_limit <= 0) {
        throw ConfigError("steer_rate_limit must be positive when set");
    }
    if (blend_speed_high <= blend_speed_low || blend_speed_low < 0) {
        throw ConfigError("blend speeds must satisfy 0 <= low < high");
    }
}

ControlCommand::ControlCommand(double steer, double throttle)
    : steer_normalized(std::clamp(steer, -1.0, 1.0)),
      throttle_normalized(std::clamp(throttle, -1.0, 1.0)) {}

double denormalize_steering(double u, const VehicleParams& params) {
    const double bound = params.steer_limit / params.steer_full_scale;
    return std::clamp(std::clamp(u, -1.0, 1.0), -bound, bound) * params.steer_full_scale;
}

double normalize_steering(double angle, const VehicleParams& params) {
    return angle / params.steer_full_scale;
}

double apply_steer_rate_limit(double prev, double desired, double dt, std::optional<double> rate) {
    if (!rate) {
        return desired;
    }
    const double max_delta = *rate * dt;
    return std::clamp(desired, prev - max_delta, prev + max_delta);
}

double speed_control(double current_speed, const SpeedControllerConfig& cfg) {
    return std::clamp(cfg.kp * (cfg.target_speed - current_speed), -1.0, 1.0);
}

double pacejka_lateral_force(double slip_angle, const VehicleParams& p, double normal_load) {
    const double bx = p.pacejka_B * slip_angle;
    const double phi = bx - p.pacejka_E * (bx - std::atan(bx));
    return p.pacejka_D * normal_load * std::sin(p.pacejka_C * std::atan(phi));
}

double pacejka_peak_slip(const VehicleParams& p) {
    // dF/dalpha = 0 where C * atan(phi) = pi/2. phi is increasing in alpha for E < 1.
    const double phi_peak = std::tan(std::numbers::pi / (2.0 * p.pacejka_C));
    auto phi = [&](double alpha) {
        const double bx = p.pacejka_B * alpha;
        return bx - p.pacejka_E * (bx - std::atan(bx));
    };
    double lo = 0.0;
    double hi = 1.0;
    while (phi(hi) < phi_peak && hi < 1e6) {
        hi *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < phi_peak ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

struct Derivative {
    double x, y, yaw, vx, vy, r;
};

// Body velocities, chassis force and tyre forces for one substep.
Derivative dynamic_rates(const VehicleState& s, double delta, double drive_force,
                         const VehicleParams& p) {
    const double load_front = p.mass * p.gravity * p.dist_cg_rear / p.wheelbase;
    const double load_rear = p.mass * p.gravity * p.dist_cg_front / p.wheelbase;

    const double vx = s.vel_long;
    const double alpha_front = delta - std::atan2(s.vel_lat + p.dist_cg_front * s.yaw_rate, vx);
    const double alpha_rear = -std::atan2(s.vel_lat - p.dist_cg_rear * s.yaw_rate, vx);
    const double fy_front = pacejka_lateral_force(alpha_front, p, load_front);
    const double fy_rear = pacejka_lateral_force(alpha_rear, p, load_rear);
    const double drag = p.drag_coeff * vx * std::abs(vx);

    const double c = std::cos(s.yaw);
    const double sn = std::sin(s.yaw);
    return {
        vx * c - s.vel_lat * sn,
        vx * sn + s.vel_lat * c,
        s.yaw_rate,
        (drive_force - fy_front * std::sin(delta) - drag) / p.mass + s.vel_lat * s.yaw_rate,
        (fy_rear + fy_front * std::cos(delta)) / p.mass - vx * s.yaw_rate,
        (p.dist_cg_front * fy_front * std::cos(delta) - p.dist_cg_rear * fy_rear) / p.yaw_inertia,
    };
}

VehicleState euler_dynamic(const VehicleState& s, double delta, double drive_force,
                           const VehicleParams& p, double h) {
    const Derivative d = dynamic_rates(s, delta, drive_force, p);
    VehicleState n = s;
    n.pos_x += h * d.x;
    n.pos_y += h * d.y;
    n.yaw += h * d.yaw;
    n.vel_long += h * d.vx;
    n.vel_lat += h * d.vy;
    n.yaw_rate += h * d.r;
    return n;
}

// Kinematic bicycle referenced at the centre of gravity; lateral states follow the no-slip values.
VehicleState euler_kinematic(const VehicleState& s, double delta, double drive_force,
                             const VehicleParams& p, double h) {
    const double vx = s.vel_long;
    const double beta = std::atan(p.dist_cg_rear * std::tan(delta) / p.wheelbase);
    const double speed = vx / std::cos(beta);
    const double drag = p.drag_coeff * vx * std::abs(vx);
    VehicleState n = s;
    n.pos_x += h * speed * std::cos(s.yaw + beta);
    n.pos_y += h * speed * std::sin(s.yaw + beta);
    n.yaw += h * vx * std::tan(delta) / p.wheelbase;
    n.vel_long += h * (drive_force - drag) / p.mass;
    n.vel_lat = n.vel_long * std::tan(beta);
    n.yaw_rate = n.vel_long * std::tan(delta) / p.wheelbase;
    return n;
}

bool finite(const VehicleState& s) {
    return std::isfinite(s.pos_x) && std::isfinite(s.pos_y) && std::isfinite(s.yaw) &&
           std::isfinite(s.vel_long) && std::isfinite(s.vel_lat) && std::isfinite(s.yaw_rate) &&
           std::isfinite(s.steer_angle);
}

} // namespace

VehicleState step_dynamics(const VehicleState& state, const ControlCommand& cmd,
                           const VehicleParams& params, double dt) {
    if (!(dt > 0.0)) {
        throw ConfigError("time step must be positive");
    }
    const double desired = denormalize_steering(cmd.steer_normalized, params);
    const double delta =
        apply_steer_rate_limit(state.steer_angle, desired, dt, params.steer_rate_limit);
    const double drive_force = cmd.throttle_normalized * params.max_drive_force;

    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / params.max_substep - 1e-9)));
    const double h = dt / substeps;

    VehicleState s = state;
    s.steer_angle = delta;
    for (int i = 0; i < substeps; ++i) {
        const double speed = std::abs(s.vel_long);
        const double lambda = std::clamp((speed - params.blend_speed_low) /
                                             (params.blend_speed_high - params.blend_speed_low),
                                         0.0, 1.0);
        if (lambda >= 1.0) {
            s = euler_dynamic(s, delta, drive_force, params, h);
        } else if (lambda <= 0.0) {
            s = euler_kinematic(s, delta, drive_force, params, h);
        } else {
            const VehicleState dyn = euler_dynamic(s, delta, drive_force, params, h);
            const VehicleState kin = euler_kinematic(s, delta, drive_force, params, h);
            s.pos_x = lambda * dyn.pos_x + (1 - lambda) * kin.pos_x;
            s.pos_y = lambda * dyn.pos_y + (1 - lambda) * kin.pos_y;
            s.yaw = lambda * dyn.yaw + (1 - lambda) * kin.yaw;
            s.vel_long = lambda * dyn.vel_long + (1 - lambda) * kin.vel_long;
            s.vel_lat = lambda * dyn.vel_lat + (1 - lambda) * kin.vel_lat;
            s.yaw_rate = lambda * dyn.yaw_rate + (1 - lambda) * kin.yaw_rate;
        }
    }
    s.yaw = wrap_angle(s.yaw);
    if (!finite(s)) {
        throw NonFiniteState("vehicle state became non-finite");
    }
    return s;
}

VehicleState mirror_state(const VehicleState& s) {
    VehicleState m = s;
    m.pos_y = -s.pos_y;
    m.yaw = wrap_angle(-s.yaw);
    m.vel_lat = -s.vel_lat;
    m.yaw_rate = -s.yaw_rate;
    m.steer_angle = -s.steer_angle;
    return m;
}

} // namespace conetrack
