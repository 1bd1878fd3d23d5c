#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "conetrack/dynamics.hpp"
#include "conetrack/track.hpp"

namespace conetrack {

/// Deterministic generator used for every stochastic component.
using Rng = std::mt19937_64;

/// Polar measurement noise on sensed cone positions.
struct NoiseConfig {
    double mu_r = 0.0;
    double mu_theta = 0.0;
    double sigma_r = 0.2;
    double sigma_theta = 0.007;
    /// Perturb every cone before choosing the nearest ones (harder variant).
    bool before_selection = false;

    static NoiseConfig none() { return {0.0, 0.0, 0.0, 0.0, false}; }
    friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

struct SensorConfig {
    double range = 10.0;
    int cones_per_side = 3;
    bool include_colour_id = true;
    /// Radial distance used for empty slots; must be at least `range`.
    double pad_radius = 10.0;

    void validate() const;
};

struct ObservationEntry {
    double rel_x = 0.0;
    double rel_y = 0.0;
    double colour_id = 0.0;  ///< -1 blue/left, +1 yellow/right
    bool padded = false;
};

/// `cones_per_side` left (blue) entries then `cones_per_side` right (yellow) entries, each
/// group in ascending true range.
struct Observation {
    std::vector<ObservationEntry> entries;
    bool include_colour_id = true;
    double range = 10.0;
};

constexpr double kBlueId = -1.0;
constexpr double kYellowId = 1.0;

Observation sense(const Track& track, const VehicleState& state, const SensorConfig& cfg,
                  const NoiseConfig& noise, Rng& rng);

std::vector<double> observation_to_vector(const Observation& obs);

std::size_t observation_size(const SensorConfig& cfg);

/// Cones within sensing range at their true positions, split by colour.
struct VisibleCones {
    std::vector<Cone> blue;
    std::vector<Cone> yellow;
};

VisibleCones visible_cones(const Track& track, const VehicleState& state, double range);

} // namespace conetrack
