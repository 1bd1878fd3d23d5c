#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "conetrack/env.hpp"

namespace conetrack {

struct PurePursuitConfig {
    double lookahead = 4.0;
    double steer_gain = 1.0;
};

/// Pure-pursuit steering toward the centerline point `lookahead` metres (arc length) ahead of
/// the vehicle's projection. Returns a normalised command clamped to +-action_limit.
double pure_pursuit_steer(const VehicleState& state, const Polyline& centerline,
                          const PurePursuitConfig& cfg, const VehicleParams& params,
                          double action_limit = 0.4);

struct DemoMetadata {
    std::string track_id;
    double speed = 0.0;
    double dt = 0.0;
    NoiseConfig noise;
    std::uint64_t seed = 0;

    friend bool operator==(const DemoMetadata&, const DemoMetadata&) = default;
};

struct DemonstrationSet {
    std::vector<Transition> transitions;
    /// Exclusive end index of each recorded episode.
    std::vector<std::size_t> episode_boundaries;
    DemoMetadata metadata;

    std::size_t obs_dim() const { return transitions.empty() ? 0 : transitions.front().obs.size(); }
    friend bool operator==(const DemonstrationSet&, const DemonstrationSet&) = default;
};

/// Drives the expert through `n_episodes` complete laps, retrying failed attempts.
/// Throws ExpertFailure when one episode fails ten times, ConfigError when n_episodes < 1.
DemonstrationSet record_demonstrations(std::shared_ptr<const Track> track, int n_episodes,
                                       const EnvConfig& env_config, const PurePursuitConfig& cfg,
                                       std::uint64_t seed, const std::string& track_id = "track");

/// Text container, version 1. Numbers use shortest round-trip formatting so reading back
/// reproduces every value exactly.
void write_demonstrations(std::ostream& out, const DemonstrationSet& demos);
DemonstrationSet read_demonstrations(std::istream& in);
void save_demonstrations(const std::string& path, const DemonstrationSet& demos);
DemonstrationSet load_demonstrations(const std::string& path);

} // namespace conetrack
