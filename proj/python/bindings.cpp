#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "conetrack/config.hpp"
#include "conetrack/errors.hpp"
#include "conetrack/eval.hpp"
#include "conetrack/track.hpp"

namespace py = pybind11;
using namespace conetrack;

namespace {

// pybind11 holders cannot be pointers to const; tracks are immutable anyway.
using TrackPtr = std::shared_ptr<Track>;

py::list cone_list(const std::vector<Cone>& cones) {
    py::list out;
    for (const auto& c : cones) out.append(py::make_tuple(c.x, c.y));
    return out;
}

py::dict trial_dict(const TrialResult& r) {
    py::dict d;
    d["trial"] = r.trial;
    d["seed"] = r.seed;
    d["completion"] = r.completion;
    d["steps"] = r.steps;
    d["smoothness"] = r.smoothness;
    d["status"] = to_string(r.status);
    d["cumulative_reward"] = r.cumulative_reward;
    d["steering"] = r.steering_trace;
    return d;
}

py::list trials(const Policy& policy, const TrackPtr& track, int n, const RunConfig& cfg, bool deterministic,
                int threads) {
    std::vector<TrialResult> results;
    {
        py::gil_scoped_release release;
        results = run_trials(policy, track, n, cfg.env_config(), deterministic, cfg.seed, threads);
    }
    py::list out;
    for (const auto& r : results) out.append(trial_dict(r));
    return out;
}

RunConfig config_with(const std::vector<std::string>& overrides) {
    RunConfig cfg;
    for (const auto& o : overrides) apply_override(cfg, o);
    cfg.validate();
    return cfg;
}

py::dict info_dict(const StepInfo& info) {
    py::dict d;
    d["status"] = to_string(info.status);
    d["truncated"] = info.truncated;
    d["steer_desired"] = info.steer_desired;
    d["steer_applied"] = info.steer_applied;
    d["progress"] = info.progress;
    d["crossings"] = info.crossings;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = library_version();

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<MalformedTrack>(m, "MalformedTrack", error.ptr());
    py::register_exception<ShapeMismatch>(m, "ShapeMismatch", error.ptr());
    py::register_exception<CorruptFile>(m, "CorruptFile", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());
    py::register_exception<ExpertFailure>(m, "ExpertFailure", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

    py::class_<Track, TrackPtr>(m, "Track")
        .def_property_readonly("blue_cones", [](const Track& t) { return cone_list(t.blue_cones()); })
        .def_property_readonly("yellow_cones", [](const Track& t) { return cone_list(t.yellow_cones()); })
        .def_property_readonly("closed", &Track::closed)
        .def_property_readonly("length", &Track::total_length)
        .def_property_readonly("start_pose", [](const Track& t) {
            const Pose2& p = t.start_pose();
            return py::make_tuple(p.x, p.y, p.yaw);
        })
        .def("contains", [](const Track& t, double x, double y) { return point_inside(t, {x, y}); }, py::arg("x"),
             py::arg("y"))
        .def("progress", [](const Track& t, const std::vector<std::pair<double, double>>& xy) {
            std::vector<Vec2> pts;
            for (const auto& [x, y] : xy) pts.push_back({x, y});
            return lap_progress(t, pts);
        });

    auto share = [](Track t) { return std::make_shared<Track>(std::move(t)); };
    m.def("oval_track", [=](double straight, double radius) { return share(oval_track(straight, radius)); },
          py::arg("straight_length") = 20.0, py::arg("radius") = 8.0);
    m.def("fsg_like_track", [=] { return share(fsg_like_track()); });
    m.def("feature_tracks", [=](double scale) {
        std::vector<std::pair<std::string, TrackPtr>> out;
        for (auto& [name, t] : feature_tracks(scale)) out.emplace_back(name, share(std::move(t)));
        return out;
    }, py::arg("scale") = 2.0);
    m.def("invert_track", [=](const TrackPtr& t) { return share(invert_track(*t)); });
    m.def("load_track", [=](const std::string& path) { return share(load_track(path)); });
    m.def("save_track", [](const std::string& path, const TrackPtr& t) { save_track(path, *t); });

    m.def("reward_fn1", [](bool done, double ang, double prev, double a1, double a2, double cap) {
        RewardConfig c;
        c.alpha1 = a1, c.alpha2 = a2, c.max_reward = cap;
        return reward_fn1(done, ang, prev, c);
    }, py::arg("done"), py::arg("angle"), py::arg("previous_angle"), py::arg("alpha1") = 1.0,
          py::arg("alpha2") = 0.0, py::arg("max_reward") = RewardConfig{}.max_reward);
    m.def("reward_fn2", [](bool done, std::pair<double, double> v, std::pair<double, double> t, double a3,
                           double a4, double cap) {
        RewardConfig c;
        c.alpha3 = a3, c.alpha4 = a4, c.max_reward = cap;
        return reward_fn2(done, {v.first, v.second}, {t.first, t.second}, c);
    }, py::arg("done"), py::arg("vehicle"), py::arg("target"), py::arg("alpha3"), py::arg("alpha4"),
          py::arg("max_reward") = RewardConfig{}.max_reward);
    m.def("reward_fn3", [](bool done, bool reached, long ci, long ct, double a5, double a6, double a7, double cap) {
        RewardConfig c;
        c.alpha5 = a5, c.alpha6 = a6, c.alpha7 = a7, c.max_reward = cap;
        return reward_fn3(done, reached, ci, ct, c);
    }, py::arg("done"), py::arg("target_reached"), py::arg("step"), py::arg("target_step"), py::arg("alpha5"),
          py::arg("alpha6"), py::arg("alpha7"), py::arg("max_reward") = RewardConfig{}.max_reward);

    m.def("smoothness", [](const std::vector<double>& trace, double dt) { return smoothness(trace, dt); },
          py::arg("steering_radians"), py::arg("dt"));

    py::class_<Environment>(m, "Environment")
        .def(py::init([](const TrackPtr& t, const std::vector<std::string>& overrides) {
                 return Environment(t, config_with(overrides).env_config());
             }),
             py::arg("track"), py::arg("overrides") = std::vector<std::string>{},
             "Overrides use the config file syntax, e.g. \"env.speed=5\".")
        .def("reset", &Environment::reset, py::arg("seed"))
        .def("step", [](Environment& env, double action) {
            const StepResult r = env.step(action);
            return py::make_tuple(r.observation, r.reward, r.done, info_dict(r.info));
        }, py::arg("action"))
        .def_property_readonly("observation_size", &Environment::observation_size)
        .def_property_readonly("pose", [](const Environment& env) {
            const Pose2 p = env.vehicle().pose();
            return py::make_tuple(p.x, p.y, p.yaw);
        });

    m.def("evaluate_expert", [](const TrackPtr& t, int n, const std::vector<std::string>& overrides, int threads) {
        const RunConfig cfg = config_with(overrides);
        return trials(ExpertPolicy{cfg.expert}, t, n, cfg, true, threads);
    }, py::arg("track"), py::arg("trials") = 20, py::arg("overrides") = std::vector<std::string>{},
          py::arg("threads") = 1);
    m.def("evaluate_model", [](const std::string& model, const TrackPtr& t, int n,
                               const std::vector<std::string>& overrides, bool deterministic, int threads) {
        const RunConfig cfg = config_with(overrides);
        const bool airl = cfg.algorithm == "airl";
        const ActorPolicy p(load_model(model), cfg.env_config().action_limit,
                            airl ? cfg.airl.policy.log_std_min : cfg.sac.log_std_min,
                            airl ? cfg.airl.policy.log_std_max : cfg.sac.log_std_max);
        return trials(p, t, n, cfg, deterministic, threads);
    }, py::arg("model"), py::arg("track"), py::arg("trials") = 20, py::arg("overrides") = std::vector<std::string>{},
          py::arg("deterministic") = true, py::arg("threads") = 1);
}
