#include "conetrack/expert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "conetrack/errors.hpp"
#include "conetrack/seeding.hpp"
#include "conetrack/text.hpp"

namespace conetrack {

double pure_pursuit_steer(const VehicleState& state, const Polyline& centerline,
                          const PurePursuitConfig& cfg, const VehicleParams& params,
                          double action_limit) {
    const Vec2 pos{state.pos_x, state.pos_y};
    const Projection proj = centerline.project(pos);
    const Vec2 goal = centerline.point_at(proj.arc + cfg.lookahead);
    const Vec2 local = to_body_frame(state.pose(), goal);
    const double alpha = std::atan2(local.y, local.x);
    const double curvature = cfg.steer_gain * 2.0 * std::sin(alpha) / cfg.lookahead;
    const double angle = std::atan(curvature * params.wheelbase);
    return std::clamp(normalize_steering(angle, params), -action_limit, action_limit);
}

DemonstrationSet record_demonstrations(std::shared_ptr<const Track> track, int n_episodes,
                                       const EnvConfig& env_config, const PurePursuitConfig& cfg,
                                       std::uint64_t seed, const std::string& track_id) {
    if (n_episodes < 1) {
        throw ConfigError("at least one demonstration episode is required");
    }
    constexpr int kAttempts = 10;
    DemonstrationSet demos;
    demos.metadata = {track_id, env_config.speed.target_speed, env_config.dt, env_config.noise, seed};
    Environment env(track, env_config);
    const Polyline& line = env.track().centerline();
    for (int episode = 0; episode < n_episodes; ++episode) {
        bool recorded = false;
        for (int attempt = 0; attempt < kAttempts && !recorded; ++attempt) {
            std::vector<Transition> buffer;
            std::vector<double> obs = env.reset(derive_seed(seed, episode, attempt));
            bool done = false;
            while (!done) {
                const double action =
                    pure_pursuit_steer(env.vehicle(), line, cfg, env_config.vehicle, env_config.action_limit);
                StepResult r = env.step(action);
                done = r.done;
                buffer.push_back({std::move(obs), action, r.reward, r.observation, r.done && !r.info.truncated});
                obs = std::move(r.observation);
            }
            if (env.episode().status == EpisodeStatus::CompletedLap) {
                demos.transitions.insert(demos.transitions.end(), std::make_move_iterator(buffer.begin()),
                                         std::make_move_iterator(buffer.end()));
                demos.episode_boundaries.push_back(demos.transitions.size());
                recorded = true;
            }
        }
        if (!recorded) {
            throw ExpertFailure("expert failed to complete " + track_id + " in " +
                                std::to_string(kAttempts) + " attempts");
        }
    }
    return demos;
}

namespace {

constexpr const char* kDemoHeader = "conetrack-demonstrations";
constexpr int kDemoVersion = 1;

std::string expect_record(std::istream& in, std::string_view key, std::vector<std::string_view>& fields,
                          std::string& storage) {
    if (!std::getline(in, storage)) {
        throw CorruptFile("demonstration file ends before '" + std::string(key) + "'");
    }
    fields = split(trim(storage), ',');
    if (trim(fields[0]) != key) {
        throw CorruptFile("expected '" + std::string(key) + "' record");
    }
    return storage;
}

} // namespace

void write_demonstrations(std::ostream& out, const DemonstrationSet& demos) {
    const auto& m = demos.metadata;
    std::string id = m.track_id;
    std::replace(id.begin(), id.end(), ',', '_');
    out << kDemoHeader << ',' << kDemoVersion << '\n';
    out << "track," << id << '\n';
    out << "speed," << format_double(m.speed) << '\n';
    out << "dt," << format_double(m.dt) << '\n';
    out << "noise," << format_double(m.noise.mu_r) << ',' << format_double(m.noise.mu_theta) << ','
        << format_double(m.noise.sigma_r) << ',' << format_double(m.noise.sigma_theta) << ','
        << (m.noise.before_selection ? 1 : 0) << '\n';
    out << "seed," << m.seed << '\n';
    out << "obs_dim," << demos.obs_dim() << '\n';
    out << "episodes," << demos.episode_boundaries.size();
    for (std::size_t b : demos.episode_boundaries) {
        out << ',' << b;
    }
    out << '\n';
    out << "transitions," << demos.transitions.size() << '\n';
    for (const auto& t : demos.transitions) {
        out << 't';
        for (double v : t.obs) {
            out << ',' << format_double(v);
        }
        out << ',' << format_double(t.action) << ',' << format_double(t.reward);
        for (double v : t.next_obs) {
            out << ',' << format_double(v);
        }
        out << ',' << (t.done ? 1 : 0) << '\n';
    }
}

DemonstrationSet read_demonstrations(std::istream& in) {
    DemonstrationSet demos;
    std::string line;
    std::vector<std::string_view> f;

    expect_record(in, kDemoHeader, f, line);
    if (f.size() != 2 || parse_int(f[1]) != kDemoVersion) {
        throw CorruptFile("unsupported demonstration file version");
    }
    expect_record(in, "track", f, line);
    demos.metadata.track_id = std::string(trim(f.at(1)));
    expect_record(in, "speed", f, line);
    demos.metadata.speed = parse_double(f.at(1));
    expect_record(in, "dt", f, line);
    demos.metadata.dt = parse_double(f.at(1));
    expect_record(in, "noise", f, line);
    if (f.size() != 6) {
        throw CorruptFile("noise record needs five fields");
    }
    demos.metadata.noise = {parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                            parse_double(f[4]), parse_int(f[5]) != 0};
    expect_record(in, "seed", f, line);
    demos.metadata.seed = static_cast<std::uint64_t>(std::stoull(std::string(trim(f.at(1)))));
    expect_record(in, "obs_dim", f, line);
    const auto obs_dim = static_cast<std::size_t>(parse_int(f.at(1)));
    expect_record(in, "episodes", f, line);
    const auto n_episodes = static_cast<std::size_t>(parse_int(f.at(1)));
    if (f.size() != n_episodes + 2) {
        throw CorruptFile("episode boundary count mismatch");
    }
    for (std::size_t i = 0; i < n_episodes; ++i) {
        demos.episode_boundaries.push_back(static_cast<std::size_t>(parse_int(f[i + 2])));
    }
    expect_record(in, "transitions", f, line);
    const auto n_transitions = static_cast<std::size_t>(parse_int(f.at(1)));
    const std::size_t expected_fields = 2 * obs_dim + 4;
    demos.transitions.reserve(n_transitions);
    for (std::size_t i = 0; i < n_transitions; ++i) {
        expect_record(in, "t", f, line);
        if (f.size() != expected_fields) {
            throw CorruptFile("transition " + std::to_string(i) + " has the wrong field count");
        }
        Transition t;
        std::size_t k = 1;
        for (std::size_t j = 0; j < obs_dim; ++j) {
            t.obs.push_back(parse_double(f[k++]));
        }
        t.action = parse_double(f[k++]);
        t.reward = parse_double(f[k++]);
        for (std::size_t j = 0; j < obs_dim; ++j) {
            t.next_obs.push_back(parse_double(f[k++]));
        }
        t.done = parse_int(f[k]) != 0;
        demos.transitions.push_back(std::move(t));
    }
    std::size_t prev = 0;
    for (std::size_t b : demos.episode_boundaries) {
        if (b <= prev || b > demos.transitions.size()) {
            throw CorruptFile("episode boundaries must increase and stay within the transitions");
        }
        prev = b;
    }
    return demos;
}

void save_demonstrations(const std::string& path, const DemonstrationSet& demos) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write_demonstrations(out, demos);
}

DemonstrationSet load_demonstrations(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    return read_demonstrations(in);
}

} // namespace conetrack
