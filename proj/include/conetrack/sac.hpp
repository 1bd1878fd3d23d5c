#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conetrack/env.hpp"
#include "conetrack/neuralnet.hpp"

namespace conetrack {

struct SacConfig {
    std::vector<int> actor_hidden{256, 256};
    std::vector<int> critic_hidden{256, 256};
    Activation hidden_activation = Activation::Tanh;
    int batch_size = 256;
    std::size_t replay_capacity = 1'000'000;
    double learning_rate = 3e-4;
    double discount = 0.99;
    double target_smoothing = 0.005;
    double entropy_target = -1.0;
    double initial_entropy_coeff = 1.0;
    bool twin_critics = true;
    int updates_per_step = 1;
    int warmup_steps = 1000;
    int max_episodes = 2000;
    /// Consecutive completed laps that count as convergence.
    int convergence_laps = 5;
    double log_std_min = -20.0;
    double log_std_max = 2.0;

    void validate() const;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten when full.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t total_pushed() const { return pushed_; }
    const Transition& at(std::size_t i) const { return data_.at(i); }
    /// Uniform indices (with replacement) into the filled region.
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t cursor_ = 0;
    std::size_t pushed_ = 0;
};

/// Column-per-sample view of a set of transitions.
struct Batch {
    Eigen::MatrixXd obs;
    Eigen::RowVectorXd actions;
    Eigen::RowVectorXd rewards;
    Eigen::MatrixXd next_obs;
    Eigen::RowVectorXd dones;

    Eigen::Index size() const { return actions.size(); }
};

Batch make_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices);
Batch make_batch(std::span<const Transition> transitions);

/// Reparameterised draw from the tanh-squashed Gaussian policy head.
struct SquashedSample {
    Eigen::RowVectorXd action;
    Eigen::RowVectorXd log_prob;
    Eigen::RowVectorXd squashed;    ///< tanh(u), the action divided by the bound
    Eigen::RowVectorXd log_std;
    Eigen::RowVectorXd noise;       ///< standard-normal draw; u = mean + exp(log_std) * noise
    Eigen::Array<bool, 1, Eigen::Dynamic> log_std_clamped;
};

/// Actor output rows are (mean, log_std). Pass zero noise for the deterministic action.
SquashedSample squash_sample(const Eigen::MatrixXd& actor_out, const Eigen::RowVectorXd& noise,
                             double bound, double log_std_min, double log_std_max);

/// Log-density of `action` under the squashed policy with the given pre-squash parameters.
/// Actions at the bound are pulled inside by 1e-6 (relative) to keep the density finite.
double squashed_log_prob(double action, double mean, double log_std, double bound);

struct ActionSample {
    double action = 0.0;
    double log_prob = 0.0;
};

ActionSample sample_action(const MlpModel& actor, std::span<const double> obs, double bound,
                           Rng& rng, bool deterministic, double log_std_min = -20.0,
                           double log_std_max = 2.0);

/// Actor, critics and optimiser state. Critics see [obs; action / bound].
struct SacAgent {
    MlpModel actor;
    std::vector<MlpModel> critics;
    std::vector<MlpModel> target_critics;
    AdamState actor_opt;
    std::vector<AdamState> critic_opts;
    double log_alpha = 0.0;
    ScalarAdam alpha_opt;
    double action_bound = 0.4;
    double log_std_min = -20.0;
    double log_std_max = 2.0;

    static SacAgent create(int obs_dim, const SacConfig& cfg, double action_bound, Rng& rng);
    double entropy_coeff() const;
};

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& actions, double bound);

/// Log-probabilities of given actions under the current actor.
Eigen::RowVectorXd policy_log_prob(const SacAgent& agent, const Eigen::MatrixXd& obs,
                                   const Eigen::RowVectorXd& actions);

/// y = r + discount * (1 - done) * (min_i Q'_i(s', a') - alpha * log pi(a'|s')) with a' drawn
/// using `next_noise`.
Eigen::RowVectorXd critic_target(const Batch& batch, const SacAgent& agent, double entropy_coeff,
                                 double discount, const Eigen::RowVectorXd& next_noise);
Eigen::RowVectorXd critic_target(const Batch& batch, const SacAgent& agent, double entropy_coeff,
                                 double discount, Rng& rng);

/// Actor loss mean(alpha * log pi - min_i Q_i) for fixed noise, with parameter gradients.
struct ActorObjective {
    double value = 0.0;
    Gradients grads;
    Eigen::RowVectorXd log_prob;
};

ActorObjective actor_objective(const SacAgent& agent, const Eigen::MatrixXd& obs,
                               const Eigen::RowVectorXd& noise, double entropy_coeff);

struct LossReport {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha_loss = 0.0;
    double entropy_coeff = 0.0;
    double mean_log_prob = 0.0;
};

/// One gradient step for critics, actor and entropy coefficient plus the target smoothing.
/// Throws TrainingDiverged on non-finite losses or parameters.
LossReport sac_update(SacAgent& agent, const Batch& batch, const SacConfig& cfg, Rng& rng);
LossReport sac_update(SacAgent& agent, const ReplayBuffer& buffer, const SacConfig& cfg, Rng& rng);

struct EpisodeLogRecord {
    int episode = 0;
    int steps = 0;
    double cumulative_reward = 0.0;
    bool lap_completed = false;
    double progress = 0.0;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double entropy_coeff = 0.0;
    double discriminator_loss = 0.0;

    friend bool operator==(const EpisodeLogRecord&, const EpisodeLogRecord&) = default;
};

struct TrainingLog {
    std::vector<EpisodeLogRecord> episodes;
    std::optional<int> episodes_to_convergence;
    long total_steps = 0;
    /// Set when training stopped on a divergence; the log up to that point is kept.
    std::optional<std::string> failure;

    friend bool operator==(const TrainingLog&, const TrainingLog&) = default;
};

/// Tracks the run of consecutive completed laps.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(int required) : required_(required) {}
    /// Returns true when this episode completes the required run.
    bool record(bool lap_completed);

private:
    int required_;
    int run_ = 0;
};

void write_training_log(std::ostream& out, const TrainingLog& log);
void write_training_summary(std::ostream& out, const TrainingLog& log);

struct TrainingHooks {
    /// Called after every finished episode.
    std::function<void(const EpisodeLogRecord&, const MlpModel& actor)> on_episode_end;
};

struct SacResult {
    SacAgent agent;
    TrainingLog log;
};

/// Episode-driven SAC. Acting and updating draw from separate seeded streams.
SacResult train_sac(Environment& env, const SacConfig& cfg, std::uint64_t seed,
                    const TrainingHooks& hooks = {});

} // namespace conetrack
