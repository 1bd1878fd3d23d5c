#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "conetrack/expert.hpp"
#include "conetrack/sac.hpp"

namespace conetrack {

struct AirlConfig {
    /// Inner actor-critic. Defaults: 64x64 networks, batch 64, one critic.
    SacConfig policy = default_policy();
    std::vector<int> discriminator_hidden{64, 64};
    Activation discriminator_activation = Activation::Relu;
    /// Samples per side (expert and policy) in each discriminator step.
    int batch_size = 64;
    int rollout_length = 1000;
    double learning_rate = 3e-4;
    /// Discriminator gradient steps after each rollout.
    int discriminator_updates = 10;
    int max_episodes = 3000;

    static SacConfig default_policy();
    void validate() const;
};

/// f(s, a, s') = g(s, a) + discount * h(s') - h(s). g sees [obs; action / bound].
struct Discriminator {
    MlpModel g_net;
    MlpModel h_net;
    double discount = 0.99;
    double action_bound = 0.4;

    static Discriminator create(int obs_dim, const AirlConfig& cfg, double action_bound, Rng& rng);
};

Eigen::RowVectorXd discriminator_f(const Discriminator& disc, const Eigen::MatrixXd& obs,
                                   const Eigen::RowVectorXd& actions, const Eigen::MatrixXd& next_obs);
double discriminator_f(const Discriminator& disc, std::span<const double> obs, double action,
                       std::span<const double> next_obs);

/// exp(f) / (exp(f) + exp(log_prob)), evaluated as a logistic of f - log_prob.
double discriminator_prob(double f, double policy_log_prob);

/// log D - log(1 - D).
double airl_reward(double d);

/// Surrogate reward f - log pi for a batch, using the current actor.
Eigen::RowVectorXd airl_rewards(const Discriminator& disc, const SacAgent& agent, const Batch& batch);

struct DiscriminatorOptimizer {
    AdamState g_opt;
    AdamState h_opt;

    static DiscriminatorOptimizer for_discriminator(const Discriminator& disc, double learning_rate);
};

/// Mean binary cross-entropy with expert samples labelled 1 and policy samples 0, and its
/// gradients. Does not modify the discriminator.
struct DiscriminatorLoss {
    double value = 0.0;
    Gradients g_grads;
    Gradients h_grads;
};

DiscriminatorLoss discriminator_loss(const Discriminator& disc, const Batch& expert,
                                     const Batch& policy, const SacAgent& agent);

/// One Adam step on the loss above; returns the loss before the step.
/// Throws TrainingDiverged on a non-finite loss.
double discriminator_update(Discriminator& disc, const Batch& expert, const Batch& policy,
                            const SacAgent& agent, DiscriminatorOptimizer& opt);

struct AirlResult {
    SacAgent agent;
    Discriminator discriminator;
    TrainingLog log;
};

/// The environment reward is never read. Logged episode rewards are surrogate rewards under
/// the discriminator current at collection time.
AirlResult train_airl(Environment& env, const DemonstrationSet& demos, const AirlConfig& cfg,
                      std::uint64_t seed, const TrainingHooks& hooks = {});

} // namespace conetrack
