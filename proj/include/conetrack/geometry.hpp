#pragma once

#include <cmath>
#include <numbers>

namespace conetrack {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;

    Vec2 position() const { return {x, y}; }
    friend constexpr bool operator==(const Pose2&, const Pose2&) = default;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w < 0.0) {
        w += two_pi;
    }
    w -= std::numbers::pi;
    if (w <= -std::numbers::pi) {
        w += two_pi;
    }
    return w;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Expresses a global point in a frame located at `pose`.
inline Vec2 to_body_frame(const Pose2& pose, Vec2 p) {
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    const Vec2 d = p - pose.position();
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Vec2 to_global_frame(const Pose2& pose, Vec2 p) {
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    return {pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y};
}

} // namespace conetrack
