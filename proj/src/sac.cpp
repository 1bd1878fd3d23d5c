#include "conetrack/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "conetrack/errors.hpp"
#include "conetrack/seeding.hpp"
#include "conetrack/text.hpp"

namespace conetrack {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// log(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
    const double a = std::abs(u);
    return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

double gaussian_log_density(double x, double mean, double log_std) {
    const double z = (x - mean) * std::exp(-log_std);
    return -0.5 * z * z - log_std - kHalfLog2Pi;
}

Eigen::RowVectorXd standard_normal_row(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::RowVectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = normal(rng);
    return out;
}

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw TrainingDiverged(std::string("non-finite ") + what);
}

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims;
    dims.push_back(in);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

} // namespace

void SacConfig::validate() const {
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (replay_capacity == 0) throw ConfigError("replay_capacity must be positive");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
    if (!(target_smoothing >= 0.0 && target_smoothing <= 1.0))
        throw ConfigError("target_smoothing must lie in [0, 1]");
    if (!(initial_entropy_coeff > 0.0)) throw ConfigError("initial_entropy_coeff must be positive");
    if (updates_per_step < 0) throw ConfigError("updates_per_step must be non-negative");
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be non-negative");
    if (max_episodes < 0) throw ConfigError("max_episodes must be non-negative");
    if (static_cast<std::size_t>(batch_size) > replay_capacity)
        throw ConfigError("batch_size must not exceed replay_capacity");
    if (convergence_laps <= 0) throw ConfigError("convergence_laps must be positive");
    if (!(log_std_min < log_std_max)) throw ConfigError("log_std_min must be below log_std_max");
    for (int h : actor_hidden)
        if (h <= 0) throw ConfigError("hidden sizes must be positive");
    for (int h : critic_hidden)
        if (h <= 0) throw ConfigError("hidden sizes must be positive");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
    ++pushed_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
    if (data_.empty()) throw Error("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> out(n);
    for (auto& i : out) i = pick(rng);
    return out;
}

namespace {

template <typename Get>
Batch gather(std::size_t n, Get get) {
    if (n == 0) throw ShapeMismatch("empty batch");
    const auto dim = static_cast<Eigen::Index>(get(0).obs.size());
    Batch b;
    const auto cols = static_cast<Eigen::Index>(n);
    b.obs.resize(dim, cols);
    b.next_obs.resize(dim, cols);
    b.actions.resize(cols);
    b.rewards.resize(cols);
    b.dones.resize(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const Transition& t = get(static_cast<std::size_t>(j));
        if (static_cast<Eigen::Index>(t.obs.size()) != dim ||
            static_cast<Eigen::Index>(t.next_obs.size()) != dim)
            throw ShapeMismatch("transition observation sizes differ");
        b.obs.col(j) = Eigen::Map<const Eigen::VectorXd>(t.obs.data(), dim);
        b.next_obs.col(j) = Eigen::Map<const Eigen::VectorXd>(t.next_obs.data(), dim);
        b.actions(j) = t.action;
        b.rewards(j) = t.reward;
        b.dones(j) = t.done ? 1.0 : 0.0;
    }
    return b;
}

} // namespace

Batch make_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices) {
    return gather(indices.size(), [&](std::size_t j) -> const Transition& {
        return buffer.at(indices[j]);
    });
}

Batch make_batch(std::span<const Transition> transitions) {
    return gather(transitions.size(),
                  [&](std::size_t j) -> const Transition& { return transitions[j]; });
}

SquashedSample squash_sample(const Eigen::MatrixXd& actor_out, const Eigen::RowVectorXd& noise,
                             double bound, double log_std_min, double log_std_max) {
    if (actor_out.rows() != 2 || actor_out.cols() != noise.size())
        throw ShapeMismatch("actor output must be 2 x batch and match the noise length");
    const Eigen::Index n = noise.size();
    SquashedSample s;
    s.action.resize(n);
    s.log_prob.resize(n);
    s.squashed.resize(n);
    s.log_std.resize(n);
    s.noise = noise;
    s.log_std_clamped.resize(n);
    const double log_bound = std::log(bound);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double raw = actor_out(1, j);
        const double ls = std::clamp(raw, log_std_min, log_std_max);
        const double u = actor_out(0, j) + std::exp(ls) * noise(j);
        const double t = std::tanh(u);
        double a = bound * t;
        if (a >= bound) a = std::nextafter(bound, 0.0);
        if (a <= -bound) a = std::nextafter(-bound, 0.0);
        s.log_std(j) = ls;
        s.log_std_clamped(j) = raw < log_std_min || raw > log_std_max;
        s.squashed(j) = t;
        s.action(j) = a;
        s.log_prob(j) = -0.5 * noise(j) * noise(j) - ls - kHalfLog2Pi - log_bound -
                        log_one_minus_tanh_sq(u);
    }
    return s;
}

double squashed_log_prob(double action, double mean, double log_std, double bound) {
    const double limit = 1.0 - 1e-6;
    const double t = std::clamp(action / bound, -limit, limit);
    const double u = std::atanh(t);
    return gaussian_log_density(u, mean, log_std) - std::log(bound) - log_one_minus_tanh_sq(u);
}

ActionSample sample_action(const MlpModel& actor, std::span<const double> obs, double bound,
                           Rng& rng, bool deterministic, double log_std_min, double log_std_max) {
    const Eigen::VectorXd out = forward(actor, obs);
    if (out.size() != 2) throw ShapeMismatch("actor must output mean and log_std");
    Eigen::RowVectorXd noise = Eigen::RowVectorXd::Zero(1);
    if (!deterministic) noise(0) = std::normal_distribution<double>(0.0, 1.0)(rng);
    const SquashedSample s = squash_sample(out, noise, bound, log_std_min, log_std_max);
    return {s.action(0), s.log_prob(0)};
}

SacAgent SacAgent::create(int obs_dim, const SacConfig& cfg, double action_bound, Rng& rng) {
    cfg.validate();
    if (obs_dim <= 0) throw ShapeMismatch("observation size must be positive");
    if (!(action_bound > 0.0)) throw ConfigError("action bound must be positive");
    SacAgent agent;
    const AdamConfig adam{cfg.learning_rate};
    agent.actor = MlpModel::create(with_ends(obs_dim, cfg.actor_hidden, 2), cfg.hidden_activation, rng);
    agent.actor_opt = AdamState::for_model(agent.actor, adam);
    const int n_critics = cfg.twin_critics ? 2 : 1;
    for (int i = 0; i < n_critics; ++i) {
        agent.critics.push_back(
            MlpModel::create(with_ends(obs_dim + 1, cfg.critic_hidden, 1), cfg.hidden_activation, rng));
        agent.target_critics.push_back(agent.critics.back());
        agent.critic_opts.push_back(AdamState::for_model(agent.critics.back(), adam));
    }
    agent.log_alpha = std::log(cfg.initial_entropy_coeff);
    agent.alpha_opt.config = adam;
    agent.action_bound = action_bound;
    agent.log_std_min = cfg.log_std_min;
    agent.log_std_max = cfg.log_std_max;
    return agent;
}

double SacAgent::entropy_coeff() const { return std::exp(log_alpha); }

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::RowVectorXd& actions, double bound) {
    if (obs.cols() != actions.size()) throw ShapeMismatch("observation and action counts differ");
    Eigen::MatrixXd in(obs.rows() + 1, obs.cols());
    in.topRows(obs.rows()) = obs;
    in.bottomRows(1) = actions / bound;
    return in;
}

Eigen::RowVectorXd policy_log_prob(const SacAgent& agent, const Eigen::MatrixXd& obs,
                                   const Eigen::RowVectorXd& actions) {
    const Eigen::MatrixXd out = forward(agent.actor, obs);
    if (out.cols() != actions.size()) throw ShapeMismatch("observation and action counts differ");
    Eigen::RowVectorXd lp(actions.size());
    for (Eigen::Index j = 0; j < actions.size(); ++j) {
        const double ls = std::clamp(out(1, j), agent.log_std_min, agent.log_std_max);
        lp(j) = squashed_log_prob(actions(j), out(0, j), ls, agent.action_bound);
    }
    return lp;
}

namespace {

Eigen::RowVectorXd min_q(const std::vector<MlpModel>& critics, const Eigen::MatrixXd& input) {
    Eigen::RowVectorXd q = forward(critics.front(), input);
    for (std::size_t i = 1; i < critics.size(); ++i)
        q = q.cwiseMin(forward(critics[i], input).row(0));
    return q;
}

} // namespace

Eigen::RowVectorXd critic_target(const Batch& batch, const SacAgent& agent, double entropy_coeff,
                                 double discount, const Eigen::RowVectorXd& next_noise) {
    const Eigen::MatrixXd out = forward(agent.actor, batch.next_obs);
    const SquashedSample next =
        squash_sample(out, next_noise, agent.action_bound, agent.log_std_min, agent.log_std_max);
    const Eigen::RowVectorXd q =
        min_q(agent.target_critics, critic_input(batch.next_obs, next.action, agent.action_bound));
    const Eigen::RowVectorXd soft = q - entropy_coeff * next.log_prob;
    return batch.rewards.array() + discount * (1.0 - batch.dones.array()) * soft.array();
}

Eigen::RowVectorXd critic_target(const Batch& batch, const SacAgent& agent, double entropy_coeff,
                                 double discount, Rng& rng) {
    return critic_target(batch, agent, entropy_coeff, discount, standard_normal_row(batch.size(), rng));
}

ActorObjective actor_objective(const SacAgent& agent, const Eigen::MatrixXd& obs,
                               const Eigen::RowVectorXd& noise, double entropy_coeff) {
    const Eigen::Index n = obs.cols();
    ForwardCache actor_cache;
    const Eigen::MatrixXd out = forward(agent.actor, obs, &actor_cache);
    const SquashedSample s =
        squash_sample(out, noise, agent.action_bound, agent.log_std_min, agent.log_std_max);
    const Eigen::MatrixXd input = critic_input(obs, s.action, agent.action_bound);

    // Per-sample minimum over critics and the gradient of that minimum w.r.t. tanh(u).
    std::vector<ForwardCache> caches(agent.critics.size());
    std::vector<Eigen::RowVectorXd> qs;
    for (std::size_t i = 0; i < agent.critics.size(); ++i)
        qs.push_back(forward(agent.critics[i], input, &caches[i]));
    Eigen::RowVectorXd q = qs.front();
    std::vector<int> argmin(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 1; i < qs.size(); ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (qs[i](j) < q(j)) {
                q(j) = qs[i](j);
                argmin[static_cast<std::size_t>(j)] = static_cast<int>(i);
            }
    Eigen::RowVectorXd dq_dt = Eigen::RowVectorXd::Zero(n);
    for (std::size_t i = 0; i < agent.critics.size(); ++i) {
        Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(1, n);
        bool any = false;
        for (Eigen::Index j = 0; j < n; ++j)
            if (argmin[static_cast<std::size_t>(j)] == static_cast<int>(i)) {
                sel(0, j) = 1.0;
                any = true;
            }
        if (!any) continue;
        dq_dt += input_gradient(agent.critics[i], caches[i], sel).bottomRows(1);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    ActorObjective result;
    result.log_prob = s.log_prob;
    result.value = (entropy_coeff * s.log_prob - q).mean();

    Eigen::MatrixXd dout(2, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double t = s.squashed(j);
        const double du = entropy_coeff * 2.0 * t - dq_dt(j) * (1.0 - t * t);
        dout(0, j) = du * inv_n;
        dout(1, j) = s.log_std_clamped(j)
                         ? 0.0
                         : (-entropy_coeff + du * std::exp(s.log_std(j)) * s.noise(j)) * inv_n;
    }
    result.grads = backward(agent.actor, actor_cache, dout);
    return result;
}

LossReport sac_update(SacAgent& agent, const Batch& batch, const SacConfig& cfg, Rng& rng) {
    const Eigen::Index n = batch.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double alpha = agent.entropy_coeff();
    LossReport report;

    const Eigen::RowVectorXd y = critic_target(batch, agent, alpha, cfg.discount, rng);
    const Eigen::MatrixXd input = critic_input(batch.obs, batch.actions, agent.action_bound);
    for (std::size_t i = 0; i < agent.critics.size(); ++i) {
        ForwardCache cache;
        const Eigen::RowVectorXd q = forward(agent.critics[i], input, &cache);
        const Eigen::RowVectorXd err = q - y;
        report.critic_loss += 0.5 * err.squaredNorm() * inv_n;
        const Gradients g = backward(agent.critics[i], cache, err * inv_n);
        adam_step(agent.critics[i], g, agent.critic_opts[i]);
    }
    require_finite(report.critic_loss, "critic loss");

    const ActorObjective obj = actor_objective(agent, batch.obs, standard_normal_row(n, rng), alpha);
    require_finite(obj.value, "actor loss");
    adam_step(agent.actor, obj.grads, agent.actor_opt);
    report.actor_loss = obj.value;
    report.mean_log_prob = obj.log_prob.mean();

    // Loss -log_alpha * mean(log pi + target); its gradient does not depend on log_alpha.
    const double alpha_grad = -(report.mean_log_prob + cfg.entropy_target);
    report.alpha_loss = agent.log_alpha * alpha_grad;
    agent.log_alpha = agent.alpha_opt.step(agent.log_alpha, alpha_grad);
    require_finite(agent.log_alpha, "entropy coefficient");
    report.entropy_coeff = agent.entropy_coeff();

    for (std::size_t i = 0; i < agent.critics.size(); ++i)
        soft_update(agent.target_critics[i], agent.critics[i], cfg.target_smoothing);

    if (!agent.actor.all_finite()) throw TrainingDiverged("non-finite actor parameters");
    for (const auto& c : agent.critics)
        if (!c.all_finite()) throw TrainingDiverged("non-finite critic parameters");
    return report;
}

LossReport sac_update(SacAgent& agent, const ReplayBuffer& buffer, const SacConfig& cfg, Rng& rng) {
    const auto idx = buffer.sample_indices(static_cast<std::size_t>(cfg.batch_size), rng);
    return sac_update(agent, make_batch(buffer, idx), cfg, rng);
}

bool ConvergenceMonitor::record(bool lap_completed) {
    run_ = lap_completed ? run_ + 1 : 0;
    return run_ >= required_;
}

void write_training_log(std::ostream& out, const TrainingLog& log) {
    out << "episode,steps,cumulative_reward,lap_completed,progress,critic_loss,actor_loss,"
           "entropy_coeff,discriminator_loss\n";
    for (const auto& r : log.episodes) {
        out << r.episode << ',' << r.steps << ',' << format_double(r.cumulative_reward) << ','
            << (r.lap_completed ? 1 : 0) << ',' << format_double(r.progress) << ','
            << format_double(r.critic_loss) << ',' << format_double(r.actor_loss) << ','
            << format_double(r.entropy_coeff) << ',' << format_double(r.discriminator_loss) << '\n';
    }
}

void write_training_summary(std::ostream& out, const TrainingLog& log) {
    out << "episodes," << log.episodes.size() << '\n';
    out << "total_steps," << log.total_steps << '\n';
    out << "episodes_to_convergence,";
    if (log.episodes_to_convergence) out << *log.episodes_to_convergence;
    else out << "none";
    out << '\n';
    if (log.failure) out << "failure," << *log.failure << '\n';
}

SacResult train_sac(Environment& env, const SacConfig& cfg, std::uint64_t seed,
                    const TrainingHooks& hooks) {
    cfg.validate();
    Rng init_rng(derive_seed(seed, 1));
    Rng act_rng(derive_seed(seed, 2));
    Rng update_rng(derive_seed(seed, 3));
    const double bound = env.config().action_limit;
    SacResult result{SacAgent::create(static_cast<int>(env.observation_size()), cfg, bound, init_rng), {}};
    ReplayBuffer buffer(cfg.replay_capacity);
    ConvergenceMonitor monitor(cfg.convergence_laps);
    std::uniform_real_distribution<double> warm(-bound, bound);

    try {
        for (int ep = 1; ep <= cfg.max_episodes; ++ep) {
            std::vector<double> obs = env.reset(derive_seed(seed, 4, static_cast<std::uint64_t>(ep)));
            EpisodeLogRecord rec;
            rec.episode = ep;
            int updates = 0;
            bool done = false;
            while (!done) {
                double action;
                if (result.log.total_steps < cfg.warmup_steps)
                    action = warm(act_rng);
                else
                    action = sample_action(result.agent.actor, obs, bound, act_rng, false,
                                           cfg.log_std_min, cfg.log_std_max)
                                 .action;
                StepResult sr = env.step(action);
                buffer.push({obs, action, sr.reward, sr.observation, sr.done && !sr.info.truncated});
                obs = std::move(sr.observation);
                done = sr.done;
                rec.cumulative_reward += sr.reward;
                ++rec.steps;
                ++result.log.total_steps;
                rec.progress = sr.info.progress;
                rec.lap_completed = sr.info.status == EpisodeStatus::CompletedLap;

                if (result.log.total_steps >= cfg.warmup_steps &&
                    buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
                    for (int u = 0; u < cfg.updates_per_step; ++u) {
                        const LossReport lr = sac_update(result.agent, buffer, cfg, update_rng);
                        rec.critic_loss += lr.critic_loss;
                        rec.actor_loss += lr.actor_loss;
                        ++updates;
                    }
                }
            }
            if (updates > 0) {
                rec.critic_loss /= updates;
                rec.actor_loss /= updates;
            }
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
