#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "conetrack/env.hpp"
#include "conetrack/expert.hpp"
#include "conetrack/neuralnet.hpp"

namespace conetrack {

/// Anything that can steer an environment. Implementations must be safe to call concurrently
/// from several threads, each with its own environment and generator.
class Policy {
public:
    virtual ~Policy() = default;
    /// Normalised steering command for the current state of `env`.
    virtual double act(const Environment& env, std::span<const double> obs, Rng& rng,
                       bool deterministic) const = 0;
    /// Required observation length, or nothing when observations are ignored.
    virtual std::optional<std::size_t> input_size() const = 0;
};

/// Trained actor network; the deterministic action is the squashed mean.
class ActorPolicy final : public Policy {
public:
    ActorPolicy(MlpModel actor, double action_bound, double log_std_min = -20.0, double log_std_max = 2.0);
    double act(const Environment& env, std::span<const double> obs, Rng& rng,
               bool deterministic) const override;
    std::optional<std::size_t> input_size() const override;

private:
    MlpModel actor_;
    double bound_;
    double log_std_min_;
    double log_std_max_;
};

/// Pure-pursuit expert; it reads the true pose and centerline, never the observation.
class ExpertPolicy final : public Policy {
public:
    explicit ExpertPolicy(PurePursuitConfig cfg = {}) : cfg_(cfg) {}
    double act(const Environment& env, std::span<const double> obs, Rng& rng,
               bool deterministic) const override;
    std::optional<std::size_t> input_size() const override { return std::nullopt; }

private:
    PurePursuitConfig cfg_;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    double completion = 0.0;
    int steps = 0;
    /// Mean absolute second difference of the applied angle in deg/s^2; NaN below three steps.
    double smoothness = 0.0;
    std::vector<double> steering_trace;   ///< applied angle per step, radians
    std::vector<double> desired_trace;    ///< pre-rate-limit angle per step, radians
    std::vector<Vec2> trajectory;
    EpisodeStatus status = EpisodeStatus::Running;
    double cumulative_reward = 0.0;

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// Runs `n` episodes with seeds derived from `seed` and the trial index. Results are ordered
/// by trial index whatever the thread count. Throws ShapeMismatch when the policy input size
/// does not match the observation encoding.
std::vector<TrialResult> run_trials(const Policy& policy, std::shared_ptr<const Track> track, int n,
                                    const EnvConfig& env_config, bool deterministic,
                                    std::uint64_t seed, int threads = 1);

/// Mean over i of |a[i+1] - 2 a[i] + a[i-1]| / dt^2, in degrees. Throws Error below three samples.
double smoothness(std::span<const double> trace_radians, double dt);

struct CompletionSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double fraction_complete = 0.0;
    std::size_t count = 0;
};

/// Order statistics over completion fractions; quartiles interpolate linearly between order
/// statistics. Throws Error on an empty input.
CompletionSummary completion_summary(std::span<const TrialResult> results);
CompletionSummary summarize(std::vector<double> values);

struct SweepResult {
    std::vector<double> speeds;
    std::vector<double> dts;
    /// median_completion[i][j] for speeds[i], dts[j].
    std::vector<std::vector<double>> median_completion;
    /// Largest dt with median completion >= 0.99 at each speed.
    std::vector<std::optional<double>> max_workable_dt;
};

/// Re-runs the policy over a speed x time-step grid. The episode time budget of `base` is kept
/// by scaling max_steps with the time step. Axes must be strictly increasing.
SweepResult sweep_speed_timestep(const Policy& policy, std::shared_ptr<const Track> track,
                                 const EnvConfig& base, std::span<const double> speeds,
                                 std::span<const double> dts, int trials_per_cell,
                                 std::uint64_t seed, int threads = 1);

/// Whether the per-speed maximum workable dt never increases with speed.
bool max_dt_non_increasing(const SweepResult& sweep);

void write_trials(std::ostream& out, std::span<const TrialResult> results);
void write_summary(std::ostream& out, const CompletionSummary& s);
/// Columns time,applied_deg,desired_deg.
void write_steering_trace(std::ostream& out, const TrialResult& r, double dt);
void write_sweep(std::ostream& out, const SweepResult& sweep);

} // namespace conetrack
