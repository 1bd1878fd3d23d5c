#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "conetrack/airl.hpp"
#include "conetrack/errors.hpp"

using namespace conetrack;

namespace {

constexpr int kObs = 5;

AirlConfig small_config() {
    AirlConfig cfg;
    cfg.policy.actor_hidden = {16, 16};
    cfg.policy.critic_hidden = {16, 16};
    cfg.policy.batch_size = 16;
    cfg.policy.warmup_steps = 50;
    cfg.discriminator_hidden = {16, 16};
    cfg.batch_size = 16;
    cfg.rollout_length = 40;
    cfg.discriminator_updates = 2;
    cfg.max_episodes = 4;
    return cfg;
}

struct Fixture {
    Rng rng{21};
    AirlConfig cfg = small_config();
    SacAgent agent = SacAgent::create(kObs, cfg.policy, 0.4, rng);
    Discriminator disc = Discriminator::create(kObs, cfg, 0.4, rng);
};

Batch make_random_batch(int n, std::mt19937_64& gen, double centre = 0.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Transition> ts;
    for (int i = 0; i < n; ++i) {
        Transition t;
        for (int k = 0; k < kObs; ++k) {
            t.obs.push_back(centre + 0.3 * u(gen));
            t.next_obs.push_back(centre + 0.3 * u(gen));
        }
        t.action = 0.39 * u(gen);
        ts.push_back(t);
    }
    return make_batch(ts);
}

void set_constant_head(MlpModel& m, double c) {
    m.weights.back().setZero();
    m.biases.back().setConstant(c);
}

std::shared_ptr<const Track> oval() { return std::make_shared<const Track>(oval_track(20.0, 8.0)); }

} // namespace

TEST(DiscriminatorF, MatchesHandComposition) {
    Fixture fx;
    std::mt19937_64 gen(1);
    const Batch b = make_random_batch(30, gen);
    const Eigen::RowVectorXd f = discriminator_f(fx.disc, b.obs, b.actions, b.next_obs);
    for (Eigen::Index j = 0; j < 30; ++j) {
        std::vector<double> s(b.obs.col(j).data(), b.obs.col(j).data() + kObs);
        std::vector<double> s2(b.next_obs.col(j).data(), b.next_obs.col(j).data() + kObs);
        std::vector<double> sa = s;
        sa.push_back(b.actions(j) / 0.4);
        const double g = forward(fx.disc.g_net, sa)(0);
        const double expected = g + fx.disc.discount * forward(fx.disc.h_net, s2)(0) - forward(fx.disc.h_net, s)(0);
        EXPECT_NEAR(f(j), expected, 1e-12);
        EXPECT_NEAR(discriminator_f(fx.disc, s, b.actions(j), s2), expected, 1e-12);
    }
}

TEST(DiscriminatorF, ShapingTermLimits) {
    Fixture fx;
    std::mt19937_64 gen(2);
    const Batch b = make_random_batch(10, gen);
    const Eigen::RowVectorXd g = forward(fx.disc.g_net, critic_input(b.obs, b.actions, 0.4));

    set_constant_head(fx.disc.h_net, 0.0);
    EXPECT_LT((discriminator_f(fx.disc, b.obs, b.actions, b.next_obs) - g).cwiseAbs().maxCoeff(), 1e-15);

    set_constant_head(fx.disc.h_net, 3.25);
    fx.disc.discount = 1.0;
    EXPECT_LT((discriminator_f(fx.disc, b.obs, b.actions, b.next_obs) - g).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DiscriminatorF, PotentialShiftInvariance) {
    Fixture fx;
    std::mt19937_64 gen(3);
    const Batch b = make_random_batch(10, gen);
    const Eigen::RowVectorXd logp = policy_log_prob(fx.agent, b.obs, b.actions);
    for (double discount : {1.0, 0.9}) {
        fx.disc.discount = discount;
        const Eigen::RowVectorXd f0 = discriminator_f(fx.disc, b.obs, b.actions, b.next_obs);
        Discriminator shifted = fx.disc;
        const double c = 2.5;
        shifted.h_net.biases.back().array() += c;
        const Eigen::RowVectorXd f1 = discriminator_f(shifted, b.obs, b.actions, b.next_obs);
        for (Eigen::Index j = 0; j < 10; ++j) {
            EXPECT_NEAR(f1(j) - f0(j), (discount - 1.0) * c, 1e-12);
            if (discount == 1.0)
                EXPECT_NEAR(discriminator_prob(f1(j), logp(j)), discriminator_prob(f0(j), logp(j)), 1e-15);
        }
    }
}

TEST(DiscriminatorProb, Examples) {
    EXPECT_EQ(discriminator_prob(-0.7, -0.7), 0.5);
    EXPECT_NEAR(discriminator_prob(1.0, 0.0), std::numbers::e / (std::numbers::e + 1.0), 1e-15);
    EXPECT_GT(discriminator_prob(800.0, 0.0), 1.0 - 1e-15);
    EXPECT_GE(discriminator_prob(-800.0, 0.0), 0.0);
    EXPECT_LT(discriminator_prob(-800.0, 0.0), 1e-300);
}

TEST(AirlReward, LogitIdentities) {
    EXPECT_EQ(airl_reward(0.5), 0.0);
    EXPECT_NEAR(airl_reward(std::numbers::e / (std::numbers::e + 1.0)), 1.0, 1e-12);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
    // Past |f - logp| of about 10 the round trip through d loses digits to 1 - d.
    std::uniform_real_distribution<double> w(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double d = u(gen);
        EXPECT_NEAR(airl_reward(1.0 - d), -airl_reward(d), 1e-9);
        const double f = w(gen);
        const double lp = w(gen);
        EXPECT_NEAR(airl_reward(discriminator_prob(f, lp)), f - lp, 1e-9);
    }
}

TEST(AirlRewards, EqualFMinusCurrentLogProb) {
    Fixture fx;
    std::mt19937_64 gen(5);
    const Batch b = make_random_batch(12, gen);
    const Eigen::RowVectorXd r = airl_rewards(fx.disc, fx.agent, b);
    const Eigen::RowVectorXd f = discriminator_f(fx.disc, b.obs, b.actions, b.next_obs);
    const Eigen::RowVectorXd lp = policy_log_prob(fx.agent, b.obs, b.actions);
    for (Eigen::Index j = 0; j < 12; ++j)
        EXPECT_NEAR(r(j), airl_reward(discriminator_prob(f(j), lp(j))), 1e-9);
}

TEST(DiscriminatorLoss, GradientsMatchFiniteDifferences) {
    Fixture fx;
    std::mt19937_64 gen(6);
    const Batch e = make_random_batch(4, gen, 0.5);
    const Batch p = make_random_batch(3, gen, -0.5);
    const DiscriminatorLoss loss = discriminator_loss(fx.disc, e, p, fx.agent);
    const double h = 1e-6;
    int failures = 0;
    for (auto [net, grads] : {std::pair{&fx.disc.g_net, &loss.g_grads}, std::pair{&fx.disc.h_net, &loss.h_grads}}) {
        for (std::size_t k = 0; k < net->layer_count(); ++k) {
            for (Eigen::Index i = 0; i < net->weights[k].size(); i += 7) {
                const double keep = net->weights[k](i);
                net->weights[k](i) = keep + h;
                const double up = discriminator_loss(fx.disc, e, p, fx.agent).value;
                net->weights[k](i) = keep - h;
                const double down = discriminator_loss(fx.disc, e, p, fx.agent).value;
                net->weights[k](i) = keep;
                const double fd = (up - down) / (2 * h);
                failures += std::abs(grads->weights[k](i) - fd) > 1e-6 + 1e-4 * std::abs(fd);
            }
        }
    }
    EXPECT_EQ(failures, 0);
}

TEST(DiscriminatorUpdate, IdenticalBatchesApproachLogFour) {
    Fixture fx;
    std::mt19937_64 gen(7);
    const Batch b = make_random_batch(64, gen);
    DiscriminatorOptimizer opt = DiscriminatorOptimizer::for_discriminator(fx.disc, 3e-3);
    double loss = 0.0;
    for (int i = 0; i < 400; ++i) {
        loss = discriminator_update(fx.disc, b, b, fx.agent, opt);
        EXPECT_GE(loss, std::log(4.0) - 1e-12);
    }
    EXPECT_NEAR(discriminator_loss(fx.disc, b, b, fx.agent).value, std::log(4.0), 1e-3);
}

TEST(DiscriminatorUpdate, SeparableToyDecreasesMonotonically) {
    Fixture fx;
    std::mt19937_64 gen(8);
    const Batch expert = make_random_batch(64, gen, 1.0);
    const Batch policy = make_random_batch(64, gen, -1.0);
    DiscriminatorOptimizer opt = DiscriminatorOptimizer::for_discriminator(fx.disc, 1e-3);
    double prev = discriminator_loss(fx.disc, expert, policy, fx.agent).value;
    for (int i = 0; i < 100; ++i) {
        discriminator_update(fx.disc, expert, policy, fx.agent, opt);
        const double now = discriminator_loss(fx.disc, expert, policy, fx.agent).value;
        EXPECT_LT(now, prev) << "step " << i;
        prev = now;
    }
}

TEST(DiscriminatorUpdate, ZeroLearningRateFreezes) {
    Fixture fx;
    std::mt19937_64 gen(9);
    const Batch e = make_random_batch(8, gen, 1.0);
    const Batch p = make_random_batch(8, gen, -1.0);
    const Discriminator before = fx.disc;
    DiscriminatorOptimizer opt = DiscriminatorOptimizer::for_discriminator(fx.disc, 0.0);
    for (int i = 0; i < 5; ++i) discriminator_update(fx.disc, e, p, fx.agent, opt);
    EXPECT_EQ(fx.disc.g_net, before.g_net);
    EXPECT_EQ(fx.disc.h_net, before.h_net);
}

class TrainAirlSmall : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        demos_ = new DemonstrationSet(record_demonstrations(oval(), 2, EnvConfig{}, {}, 3, "oval"));
    }
    static void TearDownTestSuite() {
        delete demos_;
        demos_ = nullptr;
    }
    static DemonstrationSet* demos_;
};

DemonstrationSet* TrainAirlSmall::demos_ = nullptr;

TEST_F(TrainAirlSmall, DeterministicForSeed) {
    Environment a(oval(), EnvConfig{});
    Environment b(oval(), EnvConfig{});
    const AirlConfig cfg = small_config();
    const AirlResult ra = train_airl(a, *demos_, cfg, 8);
    const AirlResult rb = train_airl(b, *demos_, cfg, 8);
    ASSERT_EQ(ra.log.episodes.size(), 4u);
    EXPECT_EQ(ra.log, rb.log);
    EXPECT_EQ(ra.discriminator.g_net, rb.discriminator.g_net);
    bool trained = false;
    for (const auto& rec : ra.log.episodes) trained |= rec.discriminator_loss != 0.0;
    EXPECT_TRUE(trained);
}

TEST_F(TrainAirlSmall, IgnoresEnvironmentReward) {
    EnvConfig plain;
    EnvConfig other;
    other.reward.function = RewardFunction::Fn2;
    other.reward.alpha3 = -50.0;
    other.reward.alpha4 = 7.0;
    EnvConfig zero;
    zero.reward.alpha1 = 0.0;
    Environment a(oval(), plain);
    Environment b(oval(), other);
    Environment c(oval(), zero);
    const AirlConfig cfg = small_config();
    const AirlResult ra = train_airl(a, *demos_, cfg, 2);
    EXPECT_EQ(train_airl(b, *demos_, cfg, 2).log, ra.log);
    const AirlResult rc = train_airl(c, *demos_, cfg, 2);
    EXPECT_EQ(rc.log, ra.log);
    EXPECT_EQ(rc.agent.actor, ra.agent.actor);
}

TEST_F(TrainAirlSmall, ActionsRespectBound) {
    Environment env(oval(), EnvConfig{});
    double worst = 0.0;
    TrainingHooks hooks;
    hooks.on_episode_end = [&](const EpisodeLogRecord&, const MlpModel&) {
        for (const auto& rec : env.episode().records) worst = std::max(worst, std::abs(rec.steer_command));
    };
    train_airl(env, *demos_, small_config(), 4, hooks);
    EXPECT_LE(worst, 0.4);
}

TEST_F(TrainAirlSmall, RejectsBadInputs) {
    Environment env(oval(), EnvConfig{});
    EXPECT_THROW(train_airl(env, DemonstrationSet{}, small_config(), 1), ConfigError);
    EnvConfig no_colour;
    no_colour.sensor.include_colour_id = false;
    Environment other(oval(), no_colour);
    EXPECT_THROW(train_airl(other, *demos_, small_config(), 1), ShapeMismatch);
    AirlConfig bad = small_config();
    bad.rollout_length = 0;
    EXPECT_THROW(train_airl(env, *demos_, bad, 1), ConfigError);
    bad = small_config();
    bad.max_episodes = 0;
    EXPECT_TRUE(train_airl(env, *demos_, bad, 1).log.episodes.empty());
}
