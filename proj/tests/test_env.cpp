#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "conetrack/env.hpp"
#include "conetrack/errors.hpp"
#include "conetrack/expert.hpp"

using namespace conetrack;

namespace {

// Direct transcriptions of the three reward equations.
double oracle_fn1(bool done, double a, double b, const RewardConfig& c) {
    if (done) return std::min(0.0, c.max_reward);
    const double smooth = c.alpha2 == 0.0 ? 0.0 : c.alpha2 / std::abs(a - b);
    return std::min(c.alpha1 + smooth, c.max_reward);
}

double oracle_fn2(bool done, Vec2 p, Vec2 t, const RewardConfig& c) {
    const double d = std::sqrt((t.x - p.x) * (t.x - p.x) + (t.y - p.y) * (t.y - p.y));
    const double step = done ? 0.0 : c.alpha4 / d;
    return (done ? c.alpha3 : 0.0) + std::min(step, c.max_reward);
}

double oracle_fn3(bool done, bool reached, long ci, long ct, const RewardConfig& c) {
    const double step = done ? 0.0 : (reached ? c.alpha7 / static_cast<double>(ci - ct) : c.alpha6);
    return (done ? c.alpha5 : 0.0) + std::min(step, c.max_reward);
}

EnvConfig quiet_config() {
    EnvConfig cfg;
    cfg.noise = NoiseConfig::none();
    return cfg;
}

std::shared_ptr<const Track> oval() { return std::make_shared<const Track>(oval_track(20.0, 8.0)); }

} // namespace

TEST(Rewards, PaperExamples) {
    RewardConfig c;
    EXPECT_EQ(reward_fn1(true, 0.3, 0.1, c), 0.0);
    EXPECT_EQ(reward_fn1(false, 0.3, 0.1, c), 1.0);
    c.alpha2 = 1.0;
    EXPECT_DOUBLE_EQ(reward_fn1(false, 0.5, 0.0, c), 3.0);
    EXPECT_EQ(reward_fn1(false, 0.2, 0.2, c), c.max_reward);

    c = {};
    c.alpha3 = -10.0;
    EXPECT_EQ(reward_fn2(true, {0, 0}, {3, 4}, c), -10.0);
    EXPECT_DOUBLE_EQ(reward_fn2(false, {0, 0}, {2, 0}, c), 0.5);
    EXPECT_EQ(reward_fn2(false, {1, 1}, {1, 1}, c), 100.0);

    c = {};
    c.alpha6 = 0.1;
    EXPECT_DOUBLE_EQ(reward_fn3(false, false, 10, 0, c), 0.1);
    c.alpha7 = 1.0;
    EXPECT_DOUBLE_EQ(reward_fn3(false, true, 20, 10, c), 0.1);
    c.alpha5 = 5.0;
    EXPECT_EQ(reward_fn3(true, true, 20, 10, c), 5.0);
    EXPECT_EQ(reward_fn3(false, true, 10, 10, c), c.max_reward);
}

TEST(Rewards, MatchOracleOnRandomInputs) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<long> steps(0, 50);
    for (int i = 0; i < 10000; ++i) {
        RewardConfig c;
        c.alpha1 = 2 * u(rng);
        c.alpha2 = coin(rng) ? 0.0 : 0.1 * u(rng);
        c.alpha3 = 10 * u(rng);
        c.alpha4 = 2 * u(rng);
        c.alpha5 = 10 * u(rng);
        c.alpha6 = u(rng);
        c.alpha7 = 2 * u(rng);
        c.max_reward = 1 + 100 * std::abs(u(rng));
        const bool done = coin(rng);
        const bool reached = coin(rng);
        const double a = 0.3 * u(rng);
        const double b = i % 10 == 0 ? a : 0.3 * u(rng);
        const Vec2 p{5 * u(rng), 5 * u(rng)};
        const Vec2 t = i % 10 == 1 ? p : Vec2{5 * u(rng), 5 * u(rng)};
        const long ct = steps(rng);
        const long ci = ct + (i % 10 == 2 ? 0 : 1 + steps(rng));

        EXPECT_EQ(reward_fn1(done, a, b, c), oracle_fn1(done, a, b, c));
        EXPECT_EQ(reward_fn2(done, p, t, c), oracle_fn2(done, p, t, c));
        EXPECT_EQ(reward_fn3(done, reached, ci, ct, c), oracle_fn3(done, reached, ci, ct, c));
        if (!done) {
            EXPECT_LE(reward_fn1(done, a, b, c), c.max_reward);
            EXPECT_LE(reward_fn2(done, p, t, c), c.max_reward);
            EXPECT_LE(reward_fn3(done, reached, ci, ct, c), c.max_reward);
        }
    }
}

TEST(NextTarget, MidpointOfFarthestPair) {
    VisibleCones v;
    v.blue = {{10, 2, ConeColour::Blue}};
    v.yellow = {{10, -2, ConeColour::Yellow}};
    EXPECT_EQ(*next_target(v, {0, 0}), (Vec2{10, 0}));

    v.blue = {{4, 0, ConeColour::Blue}, {8, 0, ConeColour::Blue}};
    v.yellow = {{0, -5, ConeColour::Yellow}, {0, -9, ConeColour::Yellow}};
    // Exhaustive oracle: the pair maximising each side's range.
    EXPECT_EQ(*next_target(v, {0, 0}), 0.5 * (Vec2{8, 0} + Vec2{0, -9}));

    v.yellow.clear();
    EXPECT_FALSE(next_target(v, {0, 0}).has_value());
}

TEST(NextTarget, SymmetricCorridorGivesCenterline) {
    const Track t = straight_track(30.0, 3.0, 3.0);
    for (double x = 0; x < 25; x += 1.3) {
        VehicleState s;
        s.pos_x = x;
        const auto target = next_target(visible_cones(t, s, 10.0), {x, 0});
        ASSERT_TRUE(target.has_value());
        EXPECT_NEAR(target->y, 0.0, 1e-12);
    }
}

TEST(Environment, ResetState) {
    Environment env(oval(), quiet_config());
    const auto a = env.reset(5);
    EXPECT_EQ(env.episode().step_count, 0);
    EXPECT_FALSE(env.episode().done);
    EXPECT_EQ(env.progress(), 0.0);
    EXPECT_EQ(env.vehicle().vel_long, 0.0);
    EXPECT_EQ(a.size(), env.observation_size());

    EnvConfig noisy;
    Environment e2(oval(), noisy);
    EXPECT_EQ(e2.reset(9), e2.reset(9));
    EXPECT_NE(e2.reset(9), e2.reset(10));
}

TEST(Environment, ClampsAction) {
    Environment a(oval(), quiet_config());
    Environment b(oval(), quiet_config());
    a.reset(1);
    b.reset(1);
    const StepResult ra = a.step(0.9);
    const StepResult rb = b.step(0.4);
    EXPECT_EQ(ra.observation, rb.observation);
    EXPECT_EQ(a.episode().records.back().steer_command, 0.4);
    EXPECT_EQ(a.vehicle(), b.vehicle());
}

TEST(Environment, DrivingOffTerminates) {
    Environment env(std::make_shared<const Track>(straight_track(60.0)), quiet_config());
    env.reset(1);
    StepResult r;
    int steps = 0;
    do {
        r = env.step(0.4);
        ++steps;
    } while (!r.done && steps < 500);
    EXPECT_TRUE(r.done);
    EXPECT_EQ(r.info.status, EpisodeStatus::FailedOffTrack);
    EXPECT_FALSE(r.info.truncated);
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_TRUE(vehicle_off_track(env.track(), env.vehicle(), env.config().vehicle));
    EXPECT_THROW(env.step(0.0), EpisodeFinished);
}

TEST(Environment, ExpertLapCompletesAndFn1CountsSteps) {
    Environment env(oval(), quiet_config());
    env.reset(2);
    const PurePursuitConfig pp;
    StepResult r;
    double total = 0.0;
    do {
        const double a = pure_pursuit_steer(env.vehicle(), env.track().centerline(), pp,
                                            env.config().vehicle, env.config().action_limit);
        r = env.step(a);
        total += r.reward;
    } while (!r.done);
    EXPECT_EQ(r.info.status, EpisodeStatus::CompletedLap);
    EXPECT_EQ(r.info.crossings, 2);
    EXPECT_EQ(r.info.progress, 1.0);
    // alpha1 per non-terminal step, nothing on the terminal one.
    EXPECT_EQ(total, static_cast<double>(env.episode().step_count - 1));
}

TEST(Environment, MaxStepsTruncates) {
    EnvConfig cfg = quiet_config();
    cfg.max_steps = 7;
    Environment env(oval(), cfg);
    env.reset(3);
    StepResult r;
    for (int i = 0; i < 7; ++i) r = env.step(0.0);
    EXPECT_TRUE(r.done);
    EXPECT_TRUE(r.info.truncated);
    EXPECT_EQ(r.info.status, EpisodeStatus::FailedOffTrack);
}

TEST(Environment, ReproducibleUnderNoise) {
    EnvConfig cfg;
    for (RewardFunction fn : {RewardFunction::Fn1, RewardFunction::Fn2, RewardFunction::Fn3}) {
        cfg.reward.function = fn;
        Environment a(oval(), cfg);
        Environment b(oval(), cfg);
        EXPECT_EQ(a.reset(11), b.reset(11));
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-0.4, 0.4);
        for (int i = 0; i < 200; ++i) {
            const double act = u(rng);
            const StepResult ra = a.step(act);
            const StepResult rb = b.step(act);
            ASSERT_EQ(ra.observation, rb.observation);
            ASSERT_EQ(ra.reward, rb.reward);
            ASSERT_EQ(ra.done, rb.done);
            if (ra.done) break;
        }
    }
}

TEST(Environment, EpisodesAlwaysTerminate) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    EnvConfig cfg;
    cfg.max_steps = 400;
    Environment env(oval(), cfg);
    for (int ep = 0; ep < 20; ++ep) {
        env.reset(static_cast<std::uint64_t>(ep));
        StepResult r;
        int n = 0;
        const double bias = 0.1 * u(rng);
        do {
            r = env.step(bias + 0.05 * u(rng));
            ++n;
        } while (!r.done);
        EXPECT_LE(n, cfg.max_steps);
        EXPECT_NE(r.info.status, EpisodeStatus::Running);
        EXPECT_EQ(env.episode().done, env.episode().status != EpisodeStatus::Running);
    }
}

TEST(Environment, TargetBookkeeping) {
    EnvConfig cfg = quiet_config();
    cfg.reward.function = RewardFunction::Fn3;
    cfg.reward.alpha6 = 0.1;
    Environment env(oval(), cfg);
    env.reset(0);
    ASSERT_TRUE(env.episode().current_target.has_value());
    const PurePursuitConfig pp;
    for (int i = 0; i < 150; ++i) {
        const double a = pure_pursuit_steer(env.vehicle(), env.track().centerline(), pp,
                                            env.config().vehicle, env.config().action_limit);
        const StepResult r = env.step(a);
        EXPECT_LE(env.episode().target_set_step, env.episode().step_count);
        EXPECT_LE(r.reward, cfg.reward.max_reward);
        if (r.done) break;
    }
}

TEST(Environment, EpisodeLogFormat) {
    Environment env(oval(), quiet_config());
    env.reset(0);
    env.step(0.1);
    std::ostringstream out;
    write_episode_log(out, env.episode().records);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
              "step,x,y,yaw,steer_command,steer_desired,steer_applied,reward,done");
}
