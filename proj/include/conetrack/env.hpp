#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "conetrack/dynamics.hpp"
#include "conetrack/perception.hpp"
#include "conetrack/track.hpp"

namespace conetrack {

enum class RewardFunction { Fn1, Fn2, Fn3 };

/// Step reward definitions. Fn1 pays for staying on track (alpha2 rewards small steering
/// changes), Fn2 pays for closeness to a moving midpoint target, Fn3 pays for reaching a
/// persistent target quickly. Terminal steps pay alpha3 (Fn2) or alpha5 (Fn3).
struct RewardConfig {
    RewardFunction function = RewardFunction::Fn1;
    double alpha1 = 1.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;
    double alpha4 = 1.0;
    double alpha5 = 0.0;
    double alpha6 = 0.0;
    double alpha7 = 1.0;
    double max_reward = 100.0;
    double target_capture_radius = 1.0;
};

double reward_fn1(bool done, double ang_i, double ang_prev, const RewardConfig& cfg);
double reward_fn2(bool done, Vec2 vehicle, Vec2 target, const RewardConfig& cfg);
double reward_fn3(bool done, bool target_reached, long c_i, long c_t, const RewardConfig& cfg);

/// Midpoint of the farthest visible blue and farthest visible yellow cone, or nothing when a
/// side has no visible cone.
std::optional<Vec2> next_target(const VisibleCones& visible, Vec2 vehicle);

struct EnvConfig {
    VehicleParams vehicle;
    SensorConfig sensor;
    NoiseConfig noise;
    RewardConfig reward;
    SpeedControllerConfig speed;
    double dt = 0.1;
    /// Normalised steering bound applied to every action.
    double action_limit = 0.4;
    int max_steps = 3000;

    void validate() const;
};

struct Transition {
    std::vector<double> obs;
    double action = 0.0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct StepRecord {
    int step = 0;
    Pose2 pose;
    double steer_command = 0.0;   ///< normalised action after clamping
    double steer_desired = 0.0;   ///< radians, before the rate limiter
    double steer_applied = 0.0;   ///< radians
    double reward = 0.0;
    bool done = false;
};

struct EpisodeState {
    int step_count = 0;
    double prev_steer_angle = 0.0;
    std::optional<Vec2> current_target;
    int target_set_step = 0;
    bool done = false;
    EpisodeStatus status = EpisodeStatus::Running;
    bool truncated = false;
    std::vector<Vec2> trajectory;
    std::vector<StepRecord> records;
};

struct StepInfo {
    EpisodeStatus status = EpisodeStatus::Running;
    /// Episode ended by the step cutoff rather than by leaving the track.
    bool truncated = false;
    double steer_desired = 0.0;
    double steer_applied = 0.0;
    double progress = 0.0;
    int crossings = 0;
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// Episodic driving environment. One instance is single-threaded; instances are independent.
class Environment {
public:
    Environment(std::shared_ptr<const Track> track, EnvConfig config);

    std::vector<double> reset(std::uint64_t seed);
    /// Throws EpisodeFinished when the episode is already over.
    StepResult step(double action);

    const VehicleState& vehicle() const { return state_; }
    const EpisodeState& episode() const { return episode_; }
    const EnvConfig& config() const { return config_; }
    const Track& track() const { return *track_; }
    std::shared_ptr<const Track> track_ptr() const { return track_; }
    const Observation& last_observation() const { return observation_; }
    std::size_t observation_size() const;
    double progress() const;

private:
    double compute_reward(bool done);

    std::shared_ptr<const Track> track_;
    EnvConfig config_;
    Rng rng_;
    VehicleState state_;
    EpisodeState episode_;
    Observation observation_;
    std::optional<ProgressTracker> tracker_;
};

/// Per-step table: step,x,y,yaw,steer_command,steer_desired,steer_applied,reward,done.
void write_episode_log(std::ostream& out, const std::vector<StepRecord>& records);

} // namespace conetrack
