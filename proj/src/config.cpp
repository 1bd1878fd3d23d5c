#include "conetrack/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "conetrack/errors.hpp"
#include "conetrack/text.hpp"

namespace conetrack {

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& s) {
    try {
        return parse_double(trim(s));
    } catch (const CorruptFile&) {
        throw ConfigError("not a number: '" + s + "'");
    }
}

long long to_int(const std::string& s) {
    try {
        return parse_int(trim(s));
    } catch (const CorruptFile&) {
        throw ConfigError("not an integer: '" + s + "'");
    }
}

bool to_bool(const std::string& raw) {
    const std::string s(trim(raw));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("not a boolean: '" + raw + "'");
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::vector<int> to_ints(const std::string& s) {
    std::vector<int> out;
    for (auto part : split(s, ',')) {
        if (trim(part).empty()) continue;
        out.push_back(static_cast<int>(to_int(std::string(part))));
    }
    if (out.empty()) throw ConfigError("empty layer list");
    return out;
}

const char* reward_name(RewardFunction f) {
    switch (f) {
    case RewardFunction::Fn1: return "fn1";
    case RewardFunction::Fn2: return "fn2";
    case RewardFunction::Fn3: return "fn3";
    }
    return "fn1";
}

RewardFunction reward_from(const std::string& raw) {
    const std::string s(trim(raw));
    if (s == "fn1") return RewardFunction::Fn1;
    if (s == "fn2") return RewardFunction::Fn2;
    if (s == "fn3") return RewardFunction::Fn3;
    throw ConfigError("unknown reward function '" + raw + "'");
}

template <typename Acc>
Field real(std::string section, std::string key, Acc acc) {
    return {std::move(section), std::move(key),
            [acc](const RunConfig& c) { return format_double(acc(const_cast<RunConfig&>(c))); },
            [acc](RunConfig& c, const std::string& v) { acc(c) = to_double(v); }};
}

template <typename Acc>
Field integer(std::string section, std::string key, Acc acc) {
    return {std::move(section), std::move(key),
            [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); },
            [acc](RunConfig& c, const std::string& v) {
                using T = std::remove_reference_t<decltype(acc(c))>;
                const long long x = to_int(v);
                if (x < 0 && std::is_unsigned_v<T>) throw ConfigError("negative value for " + v);
                acc(c) = static_cast<T>(x);
            }};
}

template <typename Acc>
Field boolean(std::string section, std::string key, Acc acc) {
    return {std::move(section), std::move(key),
            [acc](const RunConfig& c) { return std::string(acc(const_cast<RunConfig&>(c)) ? "true" : "false"); },
            [acc](RunConfig& c, const std::string& v) { acc(c) = to_bool(v); }};
}

template <typename Acc>
Field text(std::string section, std::string key, Acc acc) {
    return {std::move(section), std::move(key),
            [acc](const RunConfig& c) { return acc(const_cast<RunConfig&>(c)); },
            [acc](RunConfig& c, const std::string& v) { acc(c) = std::string(trim(v)); }};
}

template <typename Acc>
Field layers(std::string section, std::string key, Acc acc) {
    return {std::move(section), std::move(key),
            [acc](const RunConfig& c) { return join_ints(acc(const_cast<RunConfig&>(c))); },
            [acc](RunConfig& c, const std::string& v) { acc(c) = to_ints(v); }};
}

template <typename Acc>
Field activation(std::string section, std::string key, Acc acc) {
    return {std::move(section), std::move(key),
            [acc](const RunConfig& c) { return std::string(to_string(acc(const_cast<RunConfig&>(c)))); },
            [acc](RunConfig& c, const std::string& v) {
                try {
                    acc(c) = activation_from_string(std::string(trim(v)));
                } catch (const Error& e) {
                    throw ConfigError(e.what());
                }
            }};
}

#define ACC(expr) [](RunConfig& c) -> auto& { return expr; }

void add_sac_fields(std::vector<Field>& f, const std::string& s,
                    SacConfig& (*pick)(RunConfig&)) {
    auto sac = [pick](auto member) {
        return [pick, member](RunConfig& c) -> auto& { return pick(c).*member; };
    };
    f.push_back(layers(s, "actor_hidden", sac(&SacConfig::actor_hidden)));
    f.push_back(layers(s, "critic_hidden", sac(&SacConfig::critic_hidden)));
    f.push_back(activation(s, "hidden_activation", sac(&SacConfig::hidden_activation)));
    f.push_back(integer(s, "batch_size", sac(&SacConfig::batch_size)));
    f.push_back(integer(s, "replay_capacity", sac(&SacConfig::replay_capacity)));
    f.push_back(real(s, "learning_rate", sac(&SacConfig::learning_rate)));
    f.push_back(real(s, "discount", sac(&SacConfig::discount)));
    f.push_back(real(s, "target_smoothing", sac(&SacConfig::target_smoothing)));
    f.push_back(real(s, "entropy_target", sac(&SacConfig::entropy_target)));
    f.push_back(real(s, "initial_entropy_coeff", sac(&SacConfig::initial_entropy_coeff)));
    f.push_back(boolean(s, "twin_critics", sac(&SacConfig::twin_critics)));
    f.push_back(integer(s, "updates_per_step", sac(&SacConfig::updates_per_step)));
    f.push_back(integer(s, "warmup_steps", sac(&SacConfig::warmup_steps)));
    f.push_back(integer(s, "convergence_laps", sac(&SacConfig::convergence_laps)));
    f.push_back(real(s, "log_std_min", sac(&SacConfig::log_std_min)));
    f.push_back(real(s, "log_std_max", sac(&SacConfig::log_std_max)));
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(integer("run", "seed", ACC(c.seed)));
        f.push_back(text("run", "algorithm", ACC(c.algorithm)));
        f.push_back(text("run", "track", ACC(c.track)));
        f.push_back(integer("run", "checkpoint_every", ACC(c.checkpoint_every)));

        f.push_back(real("vehicle", "mass", ACC(c.env.vehicle.mass)));
        f.push_back(real("vehicle", "yaw_inertia", ACC(c.env.vehicle.yaw_inertia)));
        f.push_back(real("vehicle", "wheelbase", ACC(c.env.vehicle.wheelbase)));
        f.push_back(real("vehicle", "dist_cg_front", ACC(c.env.vehicle.dist_cg_front)));
        f.push_back(real("vehicle", "dist_cg_rear", ACC(c.env.vehicle.dist_cg_rear)));
        f.push_back(real("vehicle", "track_width", ACC(c.env.vehicle.track_width)));
        f.push_back(real("vehicle", "pacejka_b", ACC(c.env.vehicle.pacejka_B)));
        f.push_back(real("vehicle", "pacejka_c", ACC(c.env.vehicle.pacejka_C)));
        f.push_back(real("vehicle", "pacejka_d", ACC(c.env.vehicle.pacejka_D)));
        f.push_back(real("vehicle", "pacejka_e", ACC(c.env.vehicle.pacejka_E)));
        f.push_back(real("vehicle", "drag_coeff", ACC(c.env.vehicle.drag_coeff)));
        f.push_back(real("vehicle", "max_drive_force", ACC(c.env.vehicle.max_drive_force)));
        f.push_back(real("vehicle", "steer_limit_deg", ACC(c.steer_limit_deg)));
        f.push_back(real("vehicle", "steer_full_scale_deg", ACC(c.steer_full_scale_deg)));
        f.push_back(boolean("vehicle", "steer_rate_limit", ACC(c.steer_rate_limit_enabled)));
        f.push_back(real("vehicle", "steer_rate_limit_deg_s", ACC(c.steer_rate_limit_deg_s)));
        f.push_back(real("vehicle", "max_substep", ACC(c.env.vehicle.max_substep)));

        f.push_back(real("sensor", "range", ACC(c.env.sensor.range)));
        f.push_back(integer("sensor", "cones_per_side", ACC(c.env.sensor.cones_per_side)));
        f.push_back(boolean("sensor", "colour_ids", ACC(c.env.sensor.include_colour_id)));
        f.push_back(real("sensor", "pad_radius", ACC(c.env.sensor.pad_radius)));

        f.push_back(real("noise", "mu_r", ACC(c.env.noise.mu_r)));
        f.push_back(real("noise", "mu_theta", ACC(c.env.noise.mu_theta)));
        f.push_back(real("noise", "sigma_r", ACC(c.env.noise.sigma_r)));
        f.push_back(real("noise", "sigma_theta", ACC(c.env.noise.sigma_theta)));
        f.push_back(boolean("noise", "before_selection", ACC(c.env.noise.before_selection)));

        f.push_back({"reward", "function",
                     [](const RunConfig& c) { return std::string(reward_name(c.env.reward.function)); },
                     [](RunConfig& c, const std::string& v) { c.env.reward.function = reward_from(v); }});
        f.push_back(real("reward", "alpha1", ACC(c.env.reward.alpha1)));
        f.push_back(real("reward", "alpha2", ACC(c.env.reward.alpha2)));
        f.push_back(real("reward", "alpha3", ACC(c.env.reward.alpha3)));
        f.push_back(real("reward", "alpha4", ACC(c.env.reward.alpha4)));
        f.push_back(real("reward", "alpha5", ACC(c.env.reward.alpha5)));
        f.push_back(real("reward", "alpha6", ACC(c.env.reward.alpha6)));
        f.push_back(real("reward", "alpha7", ACC(c.env.reward.alpha7)));
        f.push_back(real("reward", "max", ACC(c.env.reward.max_reward)));
        f.push_back(real("reward", "capture_radius", ACC(c.env.reward.target_capture_radius)));

        f.push_back(real("env", "speed", ACC(c.env.speed.target_speed)));
        f.push_back(real("env", "speed_gain", ACC(c.env.speed.kp)));
        f.push_back(real("env", "dt", ACC(c.env.dt)));
        f.push_back(real("env", "action_limit", ACC(c.env.action_limit)));
        f.push_back(integer("env", "max_steps", ACC(c.env.max_steps)));

        add_sac_fields(f, "sac", [](RunConfig& c) -> SacConfig& { return c.sac; });
        f.push_back(integer("sac", "max_episodes", ACC(c.sac.max_episodes)));

        add_sac_fields(f, "airl", [](RunConfig& c) -> SacConfig& { return c.airl.policy; });
        f.push_back(layers("airl", "discriminator_hidden", ACC(c.airl.discriminator_hidden)));
        f.push_back(activation("airl", "discriminator_activation", ACC(c.airl.discriminator_activation)));
        f.push_back(integer("airl", "discriminator_batch_size", ACC(c.airl.batch_size)));
        f.push_back(real("airl", "discriminator_learning_rate", ACC(c.airl.learning_rate)));
        f.push_back(integer("airl", "discriminator_updates", ACC(c.airl.discriminator_updates)));
        f.push_back(integer("airl", "rollout_length", ACC(c.airl.rollout_length)));
        f.push_back(integer("airl", "max_episodes", ACC(c.airl.max_episodes)));

        f.push_back(real("expert", "lookahead", ACC(c.expert.lookahead)));
        f.push_back(real("expert", "steer_gain", ACC(c.expert.steer_gain)));
        f.push_back(integer("expert", "episodes", ACC(c.expert_episodes)));

        f.push_back(integer("eval", "trials", ACC(c.eval_trials)));
        f.push_back(boolean("eval", "deterministic", ACC(c.eval_deterministic)));
        f.push_back(integer("eval", "parallel_trials", ACC(c.parallel_trials)));
        f.push_back(integer("eval", "sweep_trials", ACC(c.sweep_trials)));
        return f;
    }();
    return table;
}

#undef ACC

const Field& find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields())
        if (f.section == section && f.key == key) return f;
    throw ConfigError("unknown config key '" + section + "." + key + "'");
}

} // namespace

EnvConfig RunConfig::env_config() const {
    EnvConfig e = env;
    e.vehicle.steer_limit = deg_to_rad(steer_limit_deg);
    e.vehicle.steer_full_scale = deg_to_rad(steer_full_scale_deg);
    e.vehicle.steer_rate_limit =
        steer_rate_limit_enabled ? std::optional<double>(deg_to_rad(steer_rate_limit_deg_s)) : std::nullopt;
    return e;
}

void RunConfig::validate() const {
    if (algorithm != "sac" && algorithm != "airl") throw ConfigError("algorithm must be sac or airl");
    if (track.empty()) throw ConfigError("track must be set");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
    if (expert_episodes < 0) throw ConfigError("expert episodes must be non-negative");
    if (eval_trials < 0 || sweep_trials < 0) throw ConfigError("trial counts must be non-negative");
    if (parallel_trials < 1) throw ConfigError("parallel_trials must be at least 1");
    env_config().validate();
    sac.validate();
    airl.validate();
}

RunConfig parse_run_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' outside any section");
        for (const auto& [key, value] : body) find_field(section, key).set(cfg, value.data());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    return parse_run_config(in);
}

void write_run_config(std::ostream& out, const RunConfig& cfg) {
    std::string current;
    for (const auto& f : fields()) {
        if (f.section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << f.section << "]\n";
            current = f.section;
        }
        out << f.key << " = " << f.get(cfg) << '\n';
    }
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_run_config(out, cfg);
    if (!out) throw IoError("failed writing " + path);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: '" + assignment + "'");
    const std::string section(trim(std::string_view(assignment).substr(0, dot)));
    const std::string key(trim(std::string_view(assignment).substr(dot + 1, eq - dot - 1)));
    find_field(section, key).set(cfg, assignment.substr(eq + 1));
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.section + "." + f.key);
    return out;
}

const char* library_version() { return CONETRACK_VERSION; }

} // namespace conetrack
