#include "conetrack/airl.hpp"

#include <algorithm>
#include <cmath>

#include "conetrack/errors.hpp"
#include "conetrack/seeding.hpp"

namespace conetrack {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<int> head_dims(int in, const std::vector<int>& hidden) {
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(1);
    return dims;
}

Eigen::MatrixXd side_by_side(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

} // namespace

SacConfig AirlConfig::default_policy() {
    SacConfig p;
    p.actor_hidden = {64, 64};
    p.critic_hidden = {64, 64};
    p.batch_size = 64;
    p.twin_critics = false;
    return p;
}

void AirlConfig::validate() const {
    policy.validate();
    if (rollout_length < 1) throw ConfigError("rollout_length must be at least 1");
    if (batch_size <= 0) throw ConfigError("discriminator batch_size must be positive");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (discriminator_updates < 0) throw ConfigError("discriminator_updates must be non-negative");
    if (max_episodes < 0) throw ConfigError("max_episodes must be non-negative");
    for (int h : discriminator_hidden)
        if (h <= 0) throw ConfigError("hidden sizes must be positive");
}

Discriminator Discriminator::create(int obs_dim, const AirlConfig& cfg, double action_bound, Rng& rng) {
    Discriminator d;
    d.g_net = MlpModel::create(head_dims(obs_dim + 1, cfg.discriminator_hidden),
                               cfg.discriminator_activation, rng);
    d.h_net = MlpModel::create(head_dims(obs_dim, cfg.discriminator_hidden),
                               cfg.discriminator_activation, rng);
    d.discount = cfg.policy.discount;
    d.action_bound = action_bound;
    return d;
}

Eigen::RowVectorXd discriminator_f(const Discriminator& disc, const Eigen::MatrixXd& obs,
                                   const Eigen::RowVectorXd& actions, const Eigen::MatrixXd& next_obs) {
    if (obs.cols() != next_obs.cols() || obs.rows() != next_obs.rows())
        throw ShapeMismatch("obs and next_obs shapes differ");
    const Eigen::RowVectorXd g = forward(disc.g_net, critic_input(obs, actions, disc.action_bound));
    const Eigen::RowVectorXd h_next = forward(disc.h_net, next_obs);
    const Eigen::RowVectorXd h_now = forward(disc.h_net, obs);
    return g + disc.discount * h_next - h_now;
}

double discriminator_f(const Discriminator& disc, std::span<const double> obs, double action,
                       std::span<const double> next_obs) {
    const auto n = static_cast<Eigen::Index>(obs.size());
    if (next_obs.size() != obs.size()) throw ShapeMismatch("obs and next_obs sizes differ");
    const Eigen::MatrixXd s = Eigen::Map<const Eigen::VectorXd>(obs.data(), n);
    const Eigen::MatrixXd s2 = Eigen::Map<const Eigen::VectorXd>(next_obs.data(), n);
    return discriminator_f(disc, s, Eigen::RowVectorXd::Constant(1, action), s2)(0);
}

double discriminator_prob(double f, double policy_log_prob) { return sigmoid(f - policy_log_prob); }

double airl_reward(double d) { return std::log(d) - std::log1p(-d); }

Eigen::RowVectorXd airl_rewards(const Discriminator& disc, const SacAgent& agent, const Batch& batch) {
    return discriminator_f(disc, batch.obs, batch.actions, batch.next_obs) -
           policy_log_prob(agent, batch.obs, batch.actions);
}

DiscriminatorOptimizer DiscriminatorOptimizer::for_discriminator(const Discriminator& disc,
                                                                 double learning_rate) {
    const AdamConfig adam{learning_rate};
    return {AdamState::for_model(disc.g_net, adam), AdamState::for_model(disc.h_net, adam)};
}

DiscriminatorLoss discriminator_loss(const Discriminator& disc, const Batch& expert,
                                     const Batch& policy, const SacAgent& agent) {
    const Eigen::Index ne = expert.size();
    const Eigen::Index np = policy.size();
    const Eigen::Index n = ne + np;
    if (ne == 0 || np == 0) throw ShapeMismatch("discriminator batches must be non-empty");
    const Eigen::MatrixXd obs = side_by_side(expert.obs, policy.obs);
    const Eigen::MatrixXd next_obs = side_by_side(expert.next_obs, policy.next_obs);
    Eigen::RowVectorXd actions(n);
    actions << expert.actions, policy.actions;

    ForwardCache g_cache;
    ForwardCache h_cache;
    const Eigen::RowVectorXd g =
        forward(disc.g_net, critic_input(obs, actions, disc.action_bound), &g_cache);
    // One pass over [next_obs, obs] serves both potential terms.
    const Eigen::RowVectorXd h = forward(disc.h_net, side_by_side(next_obs, obs), &h_cache);
    const Eigen::RowVectorXd f = g + disc.discount * h.head(n) - h.tail(n);
    const Eigen::RowVectorXd z = f - policy_log_prob(agent, obs, actions);

    // Expected expert BCE plus expected policy BCE; indifference gives log 4.
    DiscriminatorLoss out;
    Eigen::RowVectorXd df(n);
    const double inv_e = 1.0 / static_cast<double>(ne);
    const double inv_p = 1.0 / static_cast<double>(np);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j < ne) {
            out.value += softplus(-z(j)) * inv_e;
            df(j) = -sigmoid(-z(j)) * inv_e;
        } else {
            out.value += softplus(z(j)) * inv_p;
            df(j) = sigmoid(z(j)) * inv_p;
        }
    }
    out.g_grads = backward(disc.g_net, g_cache, df);
    Eigen::MatrixXd dh(1, 2 * n);
    dh << disc.discount * df, -df;
    out.h_grads = backward(disc.h_net, h_cache, dh);
    return out;
}

double discriminator_update(Discriminator& disc, const Batch& expert, const Batch& policy,
                            const SacAgent& agent, DiscriminatorOptimizer& opt) {
    const DiscriminatorLoss loss = discriminator_loss(disc, expert, policy, agent);
    if (!std::isfinite(loss.value)) throw TrainingDiverged("non-finite discriminator loss");
    adam_step(disc.g_net, loss.g_grads, opt.g_opt);
    adam_step(disc.h_net, loss.h_grads, opt.h_opt);
    if (!disc.g_net.all_finite() || !disc.h_net.all_finite())
        throw TrainingDiverged("non-finite discriminator parameters");
    return loss.value;
}

namespace {

Batch sample_from(std::span<const Transition> pool, std::size_t n, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<Transition> chosen;
    chosen.reserve(n);
    for (std::size_t i = 0; i < n; ++i) chosen.push_back(pool[pick(rng)]);
    return make_batch(chosen);
}

} // namespace

AirlResult train_airl(Environment& env, const DemonstrationSet& demos, const AirlConfig& cfg,
                      std::uint64_t seed, const TrainingHooks& hooks) {
    cfg.validate();
    if (demos.transitions.empty()) throw ConfigError("demonstration set is empty");
    const int obs_dim = static_cast<int>(env.observation_size());
    if (demos.obs_dim() != static_cast<std::size_t>(obs_dim))
        throw ShapeMismatch("demonstrations do not match the observation encoding");

    Rng init_rng(derive_seed(seed, 1));
    Rng act_rng(derive_seed(seed, 2));
    Rng update_rng(derive_seed(seed, 3));
    const double bound = env.config().action_limit;
    const SacConfig& pcfg = cfg.policy;
    AirlResult result{SacAgent::create(obs_dim, pcfg, bound, init_rng), {}, {}};
    result.discriminator = Discriminator::create(obs_dim, cfg, bound, init_rng);
    DiscriminatorOptimizer disc_opt =
        DiscriminatorOptimizer::for_discriminator(result.discriminator, cfg.learning_rate);
    ReplayBuffer buffer(pcfg.replay_capacity);
    std::vector<Transition> rollout;
    rollout.reserve(static_cast<std::size_t>(cfg.rollout_length));
    ConvergenceMonitor monitor(pcfg.convergence_laps);
    std::uniform_real_distribution<double> warm(-bound, bound);

    auto end_of_rollout = [&](EpisodeLogRecord& rec, int& policy_updates, int& disc_steps) {
        for (int k = 0; k < cfg.discriminator_updates; ++k) {
            const Batch expert = sample_from(demos.transitions, static_cast<std::size_t>(cfg.batch_size), update_rng);
            const Batch policy = sample_from(rollout, static_cast<std::size_t>(cfg.batch_size), update_rng);
            rec.discriminator_loss +=
                discriminator_update(result.discriminator, expert, policy, result.agent, disc_opt);
            ++disc_steps;
        }
        if (result.log.total_steps >= pcfg.warmup_steps) {
            const long n_updates = static_cast<long>(rollout.size()) * pcfg.updates_per_step;
            for (long u = 0; u < n_updates; ++u) {
                const auto idx = buffer.sample_indices(static_cast<std::size_t>(pcfg.batch_size), update_rng);
                Batch batch = make_batch(buffer, idx);
                batch.rewards = airl_rewards(result.discriminator, result.agent, batch);
                const LossReport lr = sac_update(result.agent, batch, pcfg, update_rng);
                rec.critic_loss += lr.critic_loss;
                rec.actor_loss += lr.actor_loss;
                ++policy_updates;
            }
        }
        rollout.clear();
    };

    try {
        for (int ep = 1; ep <= cfg.max_episodes; ++ep) {
            std::vector<double> obs = env.reset(derive_seed(seed, 4, static_cast<std::uint64_t>(ep)));
            EpisodeLogRecord rec;
            rec.episode = ep;
            int policy_updates = 0;
            int disc_steps = 0;
            bool done = false;
            while (!done) {
                const Eigen::VectorXd head = forward(result.agent.actor, obs);
                double action;
                double log_prob;
                if (result.log.total_steps < pcfg.warmup_steps) {
                    action = warm(act_rng);
                    const double ls = std::clamp(head(1), pcfg.log_std_min, pcfg.log_std_max);
                    log_prob = squashed_log_prob(action, head(0), ls, bound);
                } else {
                    const ActionSample a = sample_action(result.agent.actor, obs, bound, act_rng,
                                                         false, pcfg.log_std_min, pcfg.log_std_max);
                    action = a.action;
                    log_prob = a.log_prob;
                }
                StepResult sr = env.step(action);
                // The stored reward is a placeholder; updates relabel it from the discriminator.
                Transition t{obs, action, 0.0, sr.observation, sr.done && !sr.info.truncated};
                rec.cumulative_reward +=
                    discriminator_f(result.discriminator, t.obs, action, t.next_obs) - log_prob;
                buffer.push(t);
                rollout.push_back(std::move(t));
                obs = std::move(sr.observation);
                done = sr.done;
                ++rec.steps;
                ++result.log.total_steps;
                rec.progress = sr.info.progress;
                rec.lap_completed = sr.info.status == EpisodeStatus::CompletedLap;
                if (static_cast<int>(rollout.size()) == cfg.rollout_length)
                    end_of_rollout(rec, policy_updates, disc_steps);
            }
            if (policy_updates > 0) {
                rec.critic_loss /= policy_updates;
                rec.actor_loss /= policy_updates;
            }
            if (disc_steps > 0) rec.discriminator_loss /= disc_steps;
            rec.entropy_coeff = result.agent.entropy_coeff();
            result.log.episodes.push_back(rec);
            if (hooks.on_episode_end) hooks.on_episode_end(rec, result.agent.actor);
            if (monitor.record(rec.lap_completed)) {
                result.log.episodes_to_convergence = ep;
                break;
            }
        }
    } catch (const TrainingDiverged& e) {
        result.log.failure = e.what();
    }
    return result;
}

} // namespace conetrack
