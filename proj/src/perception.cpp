#include "conetrack/perception.hpp"

#include <algorithm>
#include <cmath>

#include "conetrack/errors.hpp"

namespace conetrack {

void SensorConfig::validate() const {
    if (!(range > 0.0) || cones_per_side < 1 || pad_radius < range) {
        throw ConfigError("sensor needs range > 0, cones_per_side >= 1 and pad_radius >= range");
    }
}

std::size_t observation_size(const SensorConfig& cfg) {
    return static_cast<std::size_t>(2 * cfg.cones_per_side) * (cfg.include_colour_id ? 3 : 2);
}

namespace {

struct Candidate {
    Vec2 body;
    double range;
};

Vec2 perturb(Vec2 body, const NoiseConfig& noise, Rng& rng) {
    if (noise.sigma_r == 0.0 && noise.sigma_theta == 0.0 && noise.mu_r == 0.0 &&
        noise.mu_theta == 0.0) {
        return body;
    }
    const double r = std::hypot(body.x, body.y);
    const double theta = std::atan2(body.y, body.x);
    std::normal_distribution<double> radial(noise.mu_r, noise.sigma_r);
    std::normal_distribution<double> angular(noise.mu_theta, noise.sigma_theta);
    // Draw order is fixed: radial then angular.
    const double nr = r + (noise.sigma_r > 0.0 ? radial(rng) : noise.mu_r);
    const double nt = theta + (noise.sigma_theta > 0.0 ? angular(rng) : noise.mu_theta);
    return {nr * std::cos(nt), nr * std::sin(nt)};
}

void fill_side(std::vector<ObservationEntry>& out, const std::vector<Cone>& cones,
               const Pose2& pose, const SensorConfig& cfg, const NoiseConfig& noise,
               double colour_id, Rng& rng) {
    std::vector<Candidate> seen;
    for (const auto& c : cones) {
        Vec2 body = to_body_frame(pose, c.position());
        const double true_range = std::hypot(body.x, body.y);
        if (true_range > cfg.range) {
            continue;
        }
        if (noise.before_selection) {
            body = perturb(body, noise, rng);
            seen.push_back({body, std::hypot(body.x, body.y)});
        } else {
            seen.push_back({body, true_range});
        }
    }
    const auto keep = std::min<std::size_t>(seen.size(), static_cast<std::size_t>(cfg.cones_per_side));
    std::partial_sort(seen.begin(), seen.begin() + static_cast<std::ptrdiff_t>(keep), seen.end(),
                      [](const Candidate& a, const Candidate& b) { return a.range < b.range; });
    for (std::size_t i = 0; i < keep; ++i) {
        const Vec2 p = noise.before_selection ? seen[i].body : perturb(seen[i].body, noise, rng);
        out.push_back({p.x, p.y, colour_id, false});
    }
    for (std::size_t i = keep; i < static_cast<std::size_t>(cfg.cones_per_side); ++i) {
        out.push_back({cfg.pad_radius, 0.0, colour_id, true});
    }
}

} // namespace

Observation sense(const Track& track, const VehicleState& state, const SensorConfig& cfg,
                  const NoiseConfig& noise, Rng& rng) {
    Observation obs;
    obs.include_colour_id = cfg.include_colour_id;
    obs.range = cfg.range;
    obs.entries.reserve(static_cast<std::size_t>(2 * cfg.cones_per_side));
    const Pose2 pose = state.pose();
    fill_side(obs.entries, track.blue_cones(), pose, cfg, noise, kBlueId, rng);
    fill_side(obs.entries, track.yellow_cones(), pose, cfg, noise, kYellowId, rng);
    return obs;
}

std::vector<double> observation_to_vector(const Observation& obs) {
    std::vector<double> v;
    v.reserve(obs.entries.size() * 3);
    for (const auto& e : obs.entries) {
        v.push_back(e.rel_x / obs.range);
        v.push_back(e.rel_y / obs.range);
        if (obs.include_colour_id) {
            v.push_back(e.colour_id);
        }
    }
    return v;
}

VisibleCones visible_cones(const Track& track, const VehicleState& state, double range) {
    VisibleCones out;
    const Vec2 p{state.pos_x, state.pos_y};
    for (const auto& c : track.blue_cones()) {
        if (distance(c.position(), p) <= range) {
            out.blue.push_back(c);
        }
    }
    for (const auto& c : track.yellow_cones()) {
        if (distance(c.position(), p) <= range) {
            out.yellow.push_back(c);
        }
    }
    return out;
}

} // namespace conetrack
