#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

#include <CLI11.hpp>

#include "conetrack/airl.hpp"
#include "conetrack/config.hpp"
#include "conetrack/errors.hpp"
#include "conetrack/eval.hpp"
#include "conetrack/expert.hpp"
#include "conetrack/sac.hpp"
#include "conetrack/text.hpp"
#include "svg.hpp"

namespace conetrack::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string track;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "INI run configuration");
        cmd->add_option("-s,--set", overrides, "Override a config value, e.g. --set env.dt=0.05")
            ->type_name("SECTION.KEY=VALUE");
        cmd->add_option("--track", track, "Track generator name or track file");
        seed_opt = cmd->add_option("--seed", seed, "Master seed");
    }

    RunConfig resolve(const std::string& fallback_config = {}) const {
        const std::string path = config_path.empty() ? fallback_config : config_path;
        RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
        for (const auto& o : overrides) apply_override(cfg, o);
        if (!track.empty()) cfg.track = track;
        if (seed_opt->count() > 0) cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    fn(out);
    if (!out) throw IoError("failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

const SacConfig& policy_config(const RunConfig& cfg) { return cfg.algorithm == "airl" ? cfg.airl.policy : cfg.sac; }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

double mean_smoothness(const std::vector<TrialResult>& results) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : results) {
        if (!std::isfinite(r.smoothness)) continue;
        sum += r.smoothness;
        ++n;
    }
    return n ? sum / n : std::nan("");
}

std::vector<double> trace_degrees(const TrialResult& r) {
    std::vector<double> out;
    for (double a : r.steering_trace) out.push_back(rad_to_deg(a));
    return out;
}

std::vector<double> trace_times(const TrialResult& r, double dt) {
    std::vector<double> out;
    for (std::size_t i = 0; i < r.steering_trace.size(); ++i) out.push_back(static_cast<double>(i + 1) * dt);
    return out;
}

plot::BoxData box(const std::string& label, const CompletionSummary& s) {
    return {label, s.min, s.q1, s.median, s.q3, s.max};
}

// Model selection shared by eval and sweep.
struct ModelOptions {
    std::string run_dir;
    std::string model_path;
    bool expert = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--run", run_dir, "Training run directory (reads config.ini and actor.model)");
        cmd->add_option("--model", model_path, "Actor network file");
        cmd->add_flag("--expert", expert, "Evaluate the pure-pursuit expert instead of a network");
    }

    std::string fallback_config() const {
        return run_dir.empty() ? std::string{} : (fs::path(run_dir) / "config.ini").string();
    }

    std::unique_ptr<Policy> policy(const RunConfig& cfg) const {
        if (expert) return std::make_unique<ExpertPolicy>(cfg.expert);
        std::string path = model_path;
        if (path.empty() && !run_dir.empty()) path = (fs::path(run_dir) / "actor.model").string();
        if (path.empty()) throw ConfigError("one of --model, --run or --expert is required");
        const SacConfig& pc = policy_config(cfg);
        return std::make_unique<ActorPolicy>(load_model(path), cfg.env_config().action_limit, pc.log_std_min,
                                             pc.log_std_max);
    }
};

// ---------------------------------------------------------------------------------------------

struct GenTrack {
    std::string kind;
    PrimitiveParams params;
    double scale = 1.0;
    bool invert = false;
    std::string out_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("kind", kind, "straight | arc | oval | fsg-like")->required();
        cmd->add_option("--length", params.length, "Straight length (m)")->capture_default_str();
        cmd->add_option("--angle", params.angle_deg, "Arc sweep in degrees, positive turns left")->capture_default_str();
        cmd->add_option("--radius", params.radius, "Arc or oval radius (m)")->capture_default_str();
        cmd->add_option("--spacing", params.spacing, "Cone spacing (m)")->capture_default_str();
        cmd->add_option("--width", params.width, "Track width (m)")->capture_default_str();
        cmd->add_option("--scale", scale, "Scale the generated geometry")->capture_default_str();
        cmd->add_flag("--invert", invert, "Drive the loop the other way with colours swapped");
        cmd->add_option("-o,--out", out_path, "Output track file")->required();
    }

    int exec(std::ostream& out) const {
        PrimitiveKind k;
        if (kind == "straight") k = PrimitiveKind::Straight;
        else if (kind == "arc") k = PrimitiveKind::Arc;
        else if (kind == "oval") k = PrimitiveKind::Oval;
        else if (kind == "fsg-like" || kind == "fsg_like") k = PrimitiveKind::FsgLike;
        else throw ConfigError("unknown track kind '" + kind + "'");
        if (!(params.spacing > 0.0) || !(params.width > 0.0)) throw ConfigError("spacing and width must be positive");
        if (!(scale > 0.0)) throw ConfigError("scale must be positive");
        Track t = generate_primitive_track(k, params);
        if (scale != 1.0) t = scale_track(t, scale);
        if (invert) t = invert_track(t);
        save_track(out_path, t);
        out << "wrote " << out_path << ": " << t.blue_cones().size() << " blue and " << t.yellow_cones().size()
            << " yellow cones, centerline " << fmt(t.total_length()) << " m, " << (t.closed() ? "closed" : "open")
            << '\n';
        return kOk;
    }
};

struct RecordExpert {
    CommonOptions common;
    int episodes = -1;
    std::string out_path;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        cmd->add_option("-n,--episodes", episodes, "Expert laps to record (default from config)");
        cmd->add_option("-o,--out", out_path, "Output demonstration file")->required();
    }

    int exec(std::ostream& out) const {
        const RunConfig cfg = common.resolve();
        const int n = episodes >= 0 ? episodes : cfg.expert_episodes;
        const auto track = resolve_track(cfg.track);
        const DemonstrationSet demos =
            record_demonstrations(track, n, cfg.env_config(), cfg.expert, cfg.seed, cfg.track);
        save_demonstrations(out_path, demos);
        out << "wrote " << out_path << ": " << demos.episode_boundaries.size() << " episodes, "
            << demos.transitions.size() << " transitions\n";
        return kOk;
    }
};

struct Train {
    std::string algorithm;
    CommonOptions common;
    std::string demos_path;
    std::string out_dir;
    int max_episodes = -1;
    int progress_every = 100;

    void attach(CLI::App* cmd) {
        cmd->add_option("algorithm", algorithm, "sac | airl")->required()->check(CLI::IsMember({"sac", "airl"}));
        common.attach(cmd);
        cmd->add_option("--demos", demos_path, "Demonstration file (airl only)");
        cmd->add_option("-o,--out", out_dir, "Run directory")->required();
        cmd->add_option("--max-episodes", max_episodes, "Override the trainer's episode budget");
        cmd->add_option("--progress", progress_every, "Print a status line every N episodes (0 for none)")->capture_default_str();
    }

    int exec(std::ostream& out, std::ostream& err) const {
        RunConfig cfg = common.resolve();
        cfg.algorithm = algorithm;
        if (max_episodes >= 0) (algorithm == "airl" ? cfg.airl.max_episodes : cfg.sac.max_episodes) = max_episodes;
        cfg.validate();
        if (algorithm == "airl" && demos_path.empty()) throw ConfigError("train airl requires --demos");

        const auto track = resolve_track(cfg.track);
        const fs::path dir(out_dir);
        const fs::path checkpoints = dir / "checkpoints";
        make_dir(checkpoints);
        save_run_config((dir / "config.ini").string(), cfg);
        write_text(dir / "seed", std::to_string(cfg.seed) + "\n");
        write_text(dir / "version", std::string(library_version()) + "\n");
        save_track((dir / "track.txt").string(), *track);

        Environment env(track, cfg.env_config());
        TrainingHooks hooks;
        hooks.on_episode_end = [&](const EpisodeLogRecord& rec, const MlpModel& actor) {
            if (cfg.checkpoint_every > 0 && rec.episode % cfg.checkpoint_every == 0) {
                char name[48];
                std::snprintf(name, sizeof name, "actor_%06d.model", rec.episode);
                save_model((checkpoints / name).string(), actor);
            }
            if (progress_every > 0 && rec.episode % progress_every == 0)
                out << "episode " << rec.episode << " steps " << rec.steps << " progress " << fmt(rec.progress)
                    << " reward " << fmt(rec.cumulative_reward) << std::endl;
        };

        TrainingLog log;
        if (algorithm == "sac") {
            SacResult r = train_sac(env, cfg.sac, cfg.seed, hooks);
            save_model((dir / "actor.model").string(), r.agent.actor);
            for (std::size_t i = 0; i < r.agent.critics.size(); ++i)
                save_model((dir / ("critic_" + std::to_string(i) + ".model")).string(), r.agent.critics[i]);
            log = std::move(r.log);
        } else {
            const DemonstrationSet demos = load_demonstrations(demos_path);
            save_demonstrations((dir / "demos.txt").string(), demos);
            AirlResult r = train_airl(env, demos, cfg.airl, cfg.seed, hooks);
            save_model((dir / "actor.model").string(), r.agent.actor);
            save_model((dir / "discriminator_g.model").string(), r.discriminator.g_net);
            save_model((dir / "discriminator_h.model").string(), r.discriminator.h_net);
            log = std::move(r.log);
        }
        write_with(dir / "training_log.csv", [&](std::ostream& o) { write_training_log(o, log); });
        write_with(dir / "summary.csv", [&](std::ostream& o) { write_training_summary(o, log); });

        if (log.failure) {
            err << "training diverged after " << log.episodes.size() << " episodes: " << *log.failure << '\n';
            return kDiverged;
        }
        if (log.episodes_to_convergence)
            out << "converged at episode " << *log.episodes_to_convergence << " (" << log.total_steps
                << " steps)\n";
        else
            out << "did not converge within " << log.episodes.size() << " episodes\n";
        out << "run written to " << dir.string() << '\n';
        return kOk;
    }
};

struct Eval {
    CommonOptions common;
    ModelOptions model;
    bool inverse = false;
    int trials = -1;
    int parallel = -1;
    bool stochastic = false;
    bool compare_expert = true;
    bool svg = false;
    std::string out_dir;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        model.attach(cmd);
        cmd->add_flag("--inverse", inverse, "Evaluate on the inverted track");
        cmd->add_option("-n,--trials", trials, "Number of trials (default from config)");
        cmd->add_option("--parallel-trials", parallel, "Worker threads (default from config)");
        cmd->add_flag("--stochastic", stochastic, "Sample actions instead of using the mean");
        cmd->add_flag("!--no-expert", compare_expert, "Skip the expert reference run");
        cmd->add_flag("--plot", svg, "Also write SVG plots");
        cmd->add_option("-o,--out", out_dir, "Output directory")->required();
    }

    int exec(std::ostream& out) const {
        const RunConfig cfg = common.resolve(model.fallback_config());
        const auto policy = model.policy(cfg);
        std::shared_ptr<const Track> track = resolve_track(cfg.track);
        if (inverse) track = std::make_shared<const Track>(invert_track(*track));
        const EnvConfig env = cfg.env_config();
        const int n = trials >= 0 ? trials : cfg.eval_trials;
        const int threads = parallel > 0 ? parallel : cfg.parallel_trials;
        const bool deterministic = stochastic ? false : cfg.eval_deterministic;

        const fs::path dir(out_dir);
        make_dir(dir);
        const auto results = run_trials(*policy, track, n, env, deterministic, cfg.seed, threads);
        write_with(dir / "trials.csv", [&](std::ostream& o) { write_trials(o, results); });
        const std::string label = (model.expert ? "expert" : "model") + std::string(inverse ? " (inverse)" : "");
        if (results.empty()) {
            out << "no trials run\n";
            return kOk;
        }
        const CompletionSummary s = completion_summary(results);
        write_with(dir / "summary.csv", [&](std::ostream& o) { write_summary(o, s); });
        write_with(dir / "trace.csv", [&](std::ostream& o) { write_steering_trace(o, results.front(), env.dt); });
        out << label << " on " << cfg.track << ": median completion " << format_double(s.median) << " (q1 "
            << format_double(s.q1) << ", q3 " << format_double(s.q3) << ") over " << s.count << " trials, "
            << "mean smoothness " << fmt(mean_smoothness(results)) << " deg/s^2\n";

        std::vector<plot::BoxData> boxes{box(label, s)};
        std::vector<plot::Series> traces{{label, trace_times(results.front(), env.dt), trace_degrees(results.front())}};
        if (compare_expert && !model.expert) {
            const auto ref = run_trials(ExpertPolicy{cfg.expert}, track, n, env, true, cfg.seed, threads);
            write_with(dir / "expert_trials.csv", [&](std::ostream& o) { write_trials(o, ref); });
            const CompletionSummary es = completion_summary(ref);
            write_with(dir / "expert_summary.csv", [&](std::ostream& o) { write_summary(o, es); });
            out << "expert reference: median completion " << format_double(es.median) << ", mean smoothness "
                << fmt(mean_smoothness(ref)) << " deg/s^2\n";
            boxes.push_back(box("expert", es));
            traces.push_back({"expert", trace_times(ref.front(), env.dt), trace_degrees(ref.front())});
        }
        if (svg) {
            write_text(dir / "completion.svg", plot::box_chart("Track completion on " + cfg.track, "completion", boxes));
            write_text(dir / "steering.svg",
                       plot::line_chart("Applied steering angle, trial 0", "time (s)", "steering (deg)", traces));
        }
        return kOk;
    }
};

struct Sweep {
    CommonOptions common;
    ModelOptions model;
    std::vector<double> speeds{2.0, 4.0, 5.0};
    std::vector<double> dts{0.1, 0.3, 1.0};
    int trials = -1;
    int parallel = -1;
    bool svg = false;
    std::string out_dir;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        model.attach(cmd);
        cmd->add_option("--speeds", speeds, "Target speeds in m/s, comma separated")->delimiter(',');
        cmd->add_option("--dts", dts, "Time steps in s, comma separated")->delimiter(',');
        cmd->add_option("-n,--trials", trials, "Trials per cell (default from config)");
        cmd->add_option("--parallel-trials", parallel, "Worker threads (default from config)");
        cmd->add_flag("--plot", svg, "Also write an SVG grid");
        cmd->add_option("-o,--out", out_dir, "Output directory")->required();
    }

    int exec(std::ostream& out) const {
        const RunConfig cfg = common.resolve(model.fallback_config());
        const auto policy = model.policy(cfg);
        const auto track = resolve_track(cfg.track);
        const int n = trials >= 0 ? trials : cfg.sweep_trials;
        const int threads = parallel > 0 ? parallel : cfg.parallel_trials;
        const SweepResult r =
            sweep_speed_timestep(*policy, track, cfg.env_config(), speeds, dts, n, cfg.seed, threads);

        const fs::path dir(out_dir);
        make_dir(dir);
        write_with(dir / "sweep.csv", [&](std::ostream& o) { write_sweep(o, r); });
        write_with(dir / "max_dt.csv", [&](std::ostream& o) {
            o << "speed,max_workable_dt\n";
            for (std::size_t i = 0; i < r.speeds.size(); ++i)
                o << format_double(r.speeds[i]) << ','
                  << (r.max_workable_dt[i] ? format_double(*r.max_workable_dt[i]) : std::string("none")) << '\n';
        });
        out << r.speeds.size() * r.dts.size() << " cells, " << n << " trials each\n";
        for (std::size_t i = 0; i < r.speeds.size(); ++i) {
            out << "speed " << format_double(r.speeds[i]) << ":";
            for (double m : r.median_completion[i]) out << ' ' << format_double(m);
            out << "  max dt " << (r.max_workable_dt[i] ? format_double(*r.max_workable_dt[i]) : "none") << '\n';
        }
        out << "max workable dt " << (max_dt_non_increasing(r) ? "does not increase" : "increases")
            << " with speed\n";
        if (svg) {
            std::vector<std::string> rows, cols;
            for (double v : r.speeds) rows.push_back(format_double(v));
            for (double v : r.dts) cols.push_back(format_double(v));
            write_text(dir / "sweep.svg", plot::heatmap("Median completion", rows, cols, r.median_completion,
                                                        "speed (m/s)", "time step (s)"));
        }
        return kOk;
    }
};

} // namespace

std::shared_ptr<const Track> resolve_track(const std::string& name) {
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "oval") return std::make_shared<const Track>(oval_track(20.0, 8.0));
    if (key == "fsg_like") return std::make_shared<const Track>(fsg_like_track());
    for (auto& [id, t] : feature_tracks(2.0))
        if (id == key) return std::make_shared<const Track>(std::move(t));
    if (!fs::exists(name)) throw ConfigError("'" + name + "' is neither a track generator nor an existing file");
    return std::make_shared<const Track>(load_track(name));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cone-track steering: track generation, expert demonstrations, SAC and AIRL training, evaluation"};
    app.name("conetrack");
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);

    GenTrack gen;
    RecordExpert rec;
    Train train;
    Eval eval;
    Sweep sweep;
    auto* gen_cmd = app.add_subcommand("gen-track", "Write a generated track file");
    auto* rec_cmd = app.add_subcommand("record-expert", "Record pure-pursuit demonstrations");
    auto* train_cmd = app.add_subcommand("train", "Train a steering policy into a run directory");
    auto* eval_cmd = app.add_subcommand("eval", "Repeated-trial evaluation of a policy");
    auto* sweep_cmd = app.add_subcommand("sweep", "Speed by time-step sensitivity grid");
    gen.attach(gen_cmd);
    rec.attach(rec_cmd);
    train.attach(train_cmd);
    eval.attach(eval_cmd);
    sweep.attach(sweep_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) return gen.exec(out);
        if (*rec_cmd) return rec.exec(out);
        if (*train_cmd) return train.exec(out, err);
        if (*eval_cmd) return eval.exec(out);
        if (*sweep_cmd) return sweep.exec(out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const TrainingDiverged& e) {
        err << "training diverged: " << e.what() << '\n';
        return kDiverged;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const CorruptFile& e) {
        err << "corrupt file: " << e.what() << '\n';
        return kIo;
    } catch (const ShapeMismatch& e) {
        err << "shape mismatch: " << e.what() << '\n';
        return kShapeMismatch;
    } catch (const ExpertFailure& e) {
        err << "expert failure: " << e.what() << '\n';
        return kExpertFailure;
    } catch (const MalformedTrack& e) {
        err << "malformed track: " << e.what() << '\n';
        return kMalformedTrack;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

} // namespace conetrack::cli
