#include "conetrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "conetrack/errors.hpp"
#include "conetrack/sac.hpp"
#include "conetrack/seeding.hpp"
#include "conetrack/text.hpp"

namespace conetrack {

ActorPolicy::ActorPolicy(MlpModel actor, double action_bound, double log_std_min, double log_std_max)
    : actor_(std::move(actor)), bound_(action_bound), log_std_min_(log_std_min), log_std_max_(log_std_max) {
    if (actor_.output_size() != 2) throw ShapeMismatch("actor must output mean and log_std");
}

double ActorPolicy::act(const Environment&, std::span<const double> obs, Rng& rng,
                        bool deterministic) const {
    return sample_action(actor_, obs, bound_, rng, deterministic, log_std_min_, log_std_max_).action;
}

std::optional<std::size_t> ActorPolicy::input_size() const {
    return static_cast<std::size_t>(actor_.input_size());
}

double ExpertPolicy::act(const Environment& env, std::span<const double>, Rng&, bool) const {
    return pure_pursuit_steer(env.vehicle(), env.track().centerline(), cfg_, env.config().vehicle,
                              env.config().action_limit);
}

double smoothness(std::span<const double> trace, double dt) {
    if (trace.size() < 3) throw Error("smoothness needs at least three samples");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i)
        sum += std::abs(trace[i + 1] - 2.0 * trace[i] + trace[i - 1]);
    return rad_to_deg(sum / static_cast<double>(trace.size() - 2) / (dt * dt));
}

namespace {

TrialResult run_one(const Policy& policy, const std::shared_ptr<const Track>& track,
                    const EnvConfig& cfg, bool deterministic, std::uint64_t seed, int index) {
    TrialResult r;
    r.trial = index;
    r.seed = derive_seed(seed, 100, static_cast<std::uint64_t>(index));
    Environment env(track, cfg);
    Rng rng(derive_seed(seed, 101, static_cast<std::uint64_t>(index)));
    std::vector<double> obs = env.reset(r.seed);
    bool done = false;
    while (!done) {
        const double action = policy.act(env, obs, rng, deterministic);
        StepResult sr = env.step(action);
        obs = std::move(sr.observation);
        done = sr.done;
        r.cumulative_reward += sr.reward;
        r.steering_trace.push_back(sr.info.steer_applied);
        r.desired_trace.push_back(sr.info.steer_desired);
        r.status = sr.info.status;
        r.completion = sr.info.progress;
    }
    if (r.status == EpisodeStatus::CompletedLap) r.completion = 1.0;
    r.steps = env.episode().step_count;
    r.trajectory = env.episode().trajectory;
    r.smoothness = r.steering_trace.size() >= 3 ? smoothness(r.steering_trace, cfg.dt)
                                                : std::numeric_limits<double>::quiet_NaN();
    return r;
}

} // namespace

std::vector<TrialResult> run_trials(const Policy& policy, std::shared_ptr<const Track> track, int n,
                                    const EnvConfig& env_config, bool deterministic,
                                    std::uint64_t seed, int threads) {
    env_config.validate();
    if (n <= 0) return {};
    if (const auto need = policy.input_size(); need && *need != observation_size(env_config.sensor))
        throw ShapeMismatch("model input size " + std::to_string(*need) +
                            " does not match observation size " +
                            std::to_string(observation_size(env_config.sensor)));
    std::vector<TrialResult> out(static_cast<std::size_t>(n));
    const int workers = std::clamp(threads, 1, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = run_one(policy, track, env_config, deterministic, seed, i);
        return out;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers)
                    out[static_cast<std::size_t>(i)] =
                        run_one(policy, track, env_config, deterministic, seed, i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace {

// Linear interpolation between order statistics (the common "type 7" definition).
double quantile_sorted(const std::vector<double>& v, double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace

CompletionSummary summarize(std::vector<double> values) {
    if (values.empty()) throw Error("cannot summarise an empty result set");
    std::sort(values.begin(), values.end());
    CompletionSummary s;
    s.count = values.size();
    s.median = quantile_sorted(values, 0.5);
    s.q1 = quantile_sorted(values, 0.25);
    s.q3 = quantile_sorted(values, 0.75);
    s.min = values.front();
    s.max = values.back();
    double sum = 0.0;
    std::size_t full = 0;
    for (double v : values) {
        sum += v;
        if (v >= 1.0) ++full;
    }
    s.mean = sum / static_cast<double>(values.size());
    s.fraction_complete = static_cast<double>(full) / static_cast<double>(values.size());
    return s;
}

CompletionSummary completion_summary(std::span<const TrialResult> results) {
    std::vector<double> values;
    values.reserve(results.size());
    for (const auto& r : results) values.push_back(r.completion);
    return summarize(std::move(values));
}

namespace {

void require_increasing(std::span<const double> axis, const char* name) {
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!(axis[i] > 0.0)) throw ConfigError(std::string(name) + " values must be positive");
        if (i > 0 && !(axis[i] > axis[i - 1]))
            throw ConfigError(std::string(name) + " must be strictly increasing");
    }
}

} // namespace

SweepResult sweep_speed_timestep(const Policy& policy, std::shared_ptr<const Track> track,
                                 const EnvConfig& base, std::span<const double> speeds,
                                 std::span<const double> dts, int trials_per_cell,
                                 std::uint64_t seed, int threads) {
    require_increasing(speeds, "speeds");
    require_increasing(dts, "dts");
    if (trials_per_cell <= 0) throw ConfigError("trials per cell must be positive");
    SweepResult out;
    out.speeds.assign(speeds.begin(), speeds.end());
    out.dts.assign(dts.begin(), dts.end());
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        std::vector<double> row;
        std::optional<double> best;
        for (std::size_t j = 0; j < dts.size(); ++j) {
            EnvConfig cfg = base;
            cfg.speed.target_speed = speeds[i];
            cfg.dt = dts[j];
            cfg.max_steps = std::max(1, static_cast<int>(std::ceil(base.max_steps * base.dt / dts[j])));
            const auto results = run_trials(policy, track, trials_per_cell, cfg, true,
                                            derive_seed(seed, i, j), threads);
            const double median = completion_summary(results).median;
            row.push_back(median);
            if (median >= 0.99) best = dts[j];
        }
        out.median_completion.push_back(std::move(row));
        out.max_workable_dt.push_back(best);
    }
    return out;
}

bool max_dt_non_increasing(const SweepResult& sweep) {
    std::optional<double> prev;
    for (const auto& m : sweep.max_workable_dt) {
        const double v = m.value_or(0.0);
        if (prev && v > *prev) return false;
        prev = v;
    }
    return true;
}

void write_trials(std::ostream& out, std::span<const TrialResult> results) {
    out << "trial,seed,status,completion,steps,smoothness_deg_s2,cumulative_reward\n";
    for (const auto& r : results) {
        out << r.trial << ',' << r.seed << ',' << to_string(r.status) << ',' << format_double(r.completion)
            << ',' << r.steps << ',' << format_double(r.smoothness) << ','
            << format_double(r.cumulative_reward) << '\n';
    }
}

void write_summary(std::ostream& out, const CompletionSummary& s) {
    out << "count,median,q1,q3,min,max,mean,fraction_complete\n"
        << s.count << ',' << format_double(s.median) << ',' << format_double(s.q1) << ','
        << format_double(s.q3) << ',' << format_double(s.min) << ',' << format_double(s.max) << ','
        << format_double(s.mean) << ',' << format_double(s.fraction_complete) << '\n';
}

void write_steering_trace(std::ostream& out, const TrialResult& r, double dt) {
    out << "time,applied_deg,desired_deg\n";
    for (std::size_t i = 0; i < r.steering_trace.size(); ++i) {
        out << format_double(static_cast<double>(i + 1) * dt) << ','
            << format_double(rad_to_deg(r.steering_trace[i])) << ','
            << format_double(rad_to_deg(r.desired_trace[i])) << '\n';
    }
}

void write_sweep(std::ostream& out, const SweepResult& sweep) {
    out << "speed,dt,median_completion\n";
    for (std::size_t i = 0; i < sweep.speeds.size(); ++i)
        for (std::size_t j = 0; j < sweep.dts.size(); ++j)
            out << format_double(sweep.speeds[i]) << ',' << format_double(sweep.dts[j]) << ','
                << format_double(sweep.median_completion[i][j]) << '\n';
}

} // namespace conetrack
