#include "conetrack/env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "conetrack/errors.hpp"
#include "conetrack/text.hpp"

namespace conetrack {

namespace {

// Quotient with x/0 read as +-infinity and 0/0 as an absent term.
double ratio(double num, double den) {
    if (num == 0.0) {
        return 0.0;
    }
    return num / den;
}

} // namespace

double reward_fn1(bool done, double ang_i, double ang_prev, const RewardConfig& cfg) {
    if (done) {
        return std::min(0.0, cfg.max_reward);
    }
    const double smooth = ratio(cfg.alpha2, std::abs(ang_i - ang_prev));
    return std::min(cfg.alpha1 + smooth, cfg.max_reward);
}

double reward_fn2(bool done, Vec2 vehicle, Vec2 target, const RewardConfig& cfg) {
    if (done) {
        return cfg.alpha3 + std::min(0.0, cfg.max_reward);
    }
    const double dist = std::sqrt((target.x - vehicle.x) * (target.x - vehicle.x) +
                                  (target.y - vehicle.y) * (target.y - vehicle.y));
    return std::min(ratio(cfg.alpha4, dist), cfg.max_reward);
}

double reward_fn3(bool done, bool target_reached, long c_i, long c_t, const RewardConfig& cfg) {
    if (done) {
        return cfg.alpha5 + std::min(0.0, cfg.max_reward);
    }
    const double step_term = target_reached
                                 ? ratio(cfg.alpha7, static_cast<double>(c_i - c_t))
                                 : cfg.alpha6;
    return std::min(step_term, cfg.max_reward);
}

std::optional<Vec2> next_target(const VisibleCones& visible, Vec2 vehicle) {
    if (visible.blue.empty() || visible.yellow.empty()) {
        return std::nullopt;
    }
    auto farthest = [vehicle](const std::vector<Cone>& cones) {
        return std::max_element(cones.begin(), cones.end(), [vehicle](const Cone& a, const Cone& b) {
                   return distance(a.position(), vehicle) < distance(b.position(), vehicle);
               })->position();
    };
    return 0.5 * (farthest(visible.blue) + farthest(visible.yellow));
}

void EnvConfig::validate() const {
    vehicle.validate();
    sensor.validate();
    if (!(dt > 0.0) || !(action_limit > 0.0) || action_limit > 1.0 || max_steps < 1) {
        throw ConfigError("env needs dt > 0, action_limit in (0, 1] and max_steps >= 1");
    }
    if (!(reward.max_reward > 0.0)) {
        throw ConfigError("max_reward must be positive");
    }
    if (!(speed.target_speed > 0.0) || !(speed.kp > 0.0)) {
        throw ConfigError("speed controller needs target_speed > 0 and kp > 0");
    }
    if (noise.sigma_r < 0.0 || noise.sigma_theta < 0.0) {
        throw ConfigError("noise standard deviations must be non-negative");
    }
}

Environment::Environment(std::shared_ptr<const Track> track, EnvConfig config)
    : track_(std::move(track)), config_(std::move(config)) {
    config_.validate();
    reset(0);
}

std::size_t Environment::observation_size() const { return conetrack::observation_size(config_.sensor); }

double Environment::progress() const { return tracker_->progress(); }

std::vector<double> Environment::reset(std::uint64_t seed) {
    rng_.seed(seed);
    const Pose2& start = track_->start_pose();
    state_ = VehicleState{};
    state_.pos_x = start.x;
    state_.pos_y = start.y;
    state_.yaw = wrap_angle(start.yaw);
    episode_ = EpisodeState{};
    episode_.trajectory.push_back(start.position());
    tracker_.emplace(*track_);
    tracker_->add(start.position());
    if (config_.reward.function != RewardFunction::Fn1) {
        const auto visible = visible_cones(*track_, state_, config_.sensor.range);
        episode_.current_target = next_target(visible, start.position());
    }
    observation_ = sense(*track_, state_, config_.sensor, config_.noise, rng_);
    return observation_to_vector(observation_);
}

StepResult Environment::step(double action) {
    if (episode_.done) {
        throw EpisodeFinished("step called on a finished episode; call reset first");
    }
    const double command = std::clamp(action, -config_.action_limit, config_.action_limit);
    const double throttle = speed_control(state_.vel_long, config_.speed);
    const double prev_angle = state_.steer_angle;
    const double desired = denormalize_steering(command, config_.vehicle);

    state_ = step_dynamics(state_, ControlCommand(command, throttle), config_.vehicle, config_.dt);
    episode_.prev_steer_angle = prev_angle;
    ++episode_.step_count;
    const Vec2 pos{state_.pos_x, state_.pos_y};
    episode_.trajectory.push_back(pos);
    tracker_->add(pos);

    if (vehicle_off_track(*track_, state_, config_.vehicle)) {
        episode_.status = EpisodeStatus::FailedOffTrack;
    } else if (tracker_->completed()) {
        episode_.status = EpisodeStatus::CompletedLap;
    } else if (episode_.step_count >= config_.max_steps) {
        episode_.status = EpisodeStatus::FailedOffTrack;
        episode_.truncated = true;
    }
    episode_.done = episode_.status != EpisodeStatus::Running;

    StepResult result;
    result.reward = compute_reward(episode_.done);
    result.done = episode_.done;
    observation_ = sense(*track_, state_, config_.sensor, config_.noise, rng_);
    result.observation = observation_to_vector(observation_);
    result.info = {episode_.status, episode_.truncated, desired, state_.steer_angle,
                   tracker_->progress(), tracker_->crossings()};
    episode_.records.push_back({episode_.step_count, state_.pose(), command, desired,
                                state_.steer_angle, result.reward, result.done});
    return result;
}

double Environment::compute_reward(bool done) {
    const RewardConfig& cfg = config_.reward;
    const Vec2 pos{state_.pos_x, state_.pos_y};
    switch (cfg.function) {
    case RewardFunction::Fn1:
        return reward_fn1(done, state_.steer_angle, episode_.prev_steer_angle, cfg);
    case RewardFunction::Fn2: {
        const double r = episode_.current_target
                             ? reward_fn2(done, pos, *episode_.current_target, cfg)
                             : (done ? cfg.alpha3 : 0.0);
        const auto visible = visible_cones(*track_, state_, config_.sensor.range);
        if (auto target = next_target(visible, pos)) {
            episode_.current_target = target;
            episode_.target_set_step = episode_.step_count;
        }
        return r;
    }
    case RewardFunction::Fn3: {
        if (!episode_.current_target) {
            const auto visible = visible_cones(*track_, state_, config_.sensor.range);
            episode_.current_target = next_target(visible, pos);
            episode_.target_set_step = episode_.step_count;
            return done ? cfg.alpha5 : 0.0;
        }
        const bool reached = distance(pos, *episode_.current_target) <= cfg.target_capture_radius;
        const double r = reward_fn3(done, reached, episode_.step_count, episode_.target_set_step, cfg);
        if (reached) {
            const auto visible = visible_cones(*track_, state_, config_.sensor.range);
            episode_.current_target = next_target(visible, pos);
            episode_.target_set_step = episode_.step_count;
        }
        return r;
    }
    }
    return 0.0;
}

void write_episode_log(std::ostream& out, const std::vector<StepRecord>& records) {
    out << "step,x,y,yaw,steer_command,steer_desired,steer_applied,reward,done\n";
    for (const auto& r : records) {
        out << r.step << ',' << format_double(r.pose.x) << ',' << format_double(r.pose.y) << ','
            << format_double(r.pose.yaw) << ',' << format_double(r.steer_command) << ','
            << format_double(r.steer_desired) << ',' << format_double(r.steer_applied) << ','
            << format_double(r.reward) << ',' << (r.done ? 1 : 0) << '\n';
    }
}

} // namespace conetrack
