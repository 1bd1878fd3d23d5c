#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "conetrack/airl.hpp"
#include "conetrack/env.hpp"
#include "conetrack/expert.hpp"
#include "conetrack/sac.hpp"

namespace conetrack {

/// Everything needed to reproduce a run. Defaults are the selected setups: steering limited
/// to +-18 deg with a 112.5 deg/s rate limit, +-1 colour ids, reward Fn1 with alpha1 = 1 for
/// SAC, and a 1000-step rollout for AIRL.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string algorithm = "sac";
    /// Generator name (straight, arc, oval, fsg-like) or a track file path.
    std::string track = "oval";
    /// Vehicle angles are held in degrees here and converted by env_config(), so a written
    /// config reads back bit-identically.
    double steer_limit_deg = 18.0;
    double steer_full_scale_deg = 45.0;
    bool steer_rate_limit_enabled = true;
    double steer_rate_limit_deg_s = 112.5;
    /// Angle fields of env.vehicle are ignored in favour of the degree fields above.
    EnvConfig env;
    SacConfig sac;
    AirlConfig airl;
    PurePursuitConfig expert;
    int expert_episodes = 20;
    int eval_trials = 20;
    bool eval_deterministic = true;
    int parallel_trials = 1;
    int sweep_trials = 5;
    int checkpoint_every = 100;

    EnvConfig env_config() const;
    void validate() const;
};

/// INI text with sections run, vehicle, sensor, noise, reward, env, sac, airl, expert, eval.
/// Missing keys keep their defaults; unknown sections or keys raise ConfigError.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

/// Writes every key, so the output alone reproduces the configuration exactly.
void write_run_config(std::ostream& out, const RunConfig& cfg);
void save_run_config(const std::string& path, const RunConfig& cfg);

/// Applies one `section.key=value` assignment.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// All `section.key` names in file order.
std::vector<std::string> config_keys();

/// Package version plus `git describe` output when built from a checkout.
const char* library_version();

} // namespace conetrack
