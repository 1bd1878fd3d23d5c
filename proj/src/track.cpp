#include "conetrack/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "conetrack/errors.hpp"
#include "conetrack/text.hpp"

namespace conetrack {

namespace {

constexpr double kOnBoundary = 1e-9;

double segment_distance(Vec2 p, const LineSegment& s) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, s.a + t * d);
}

// Maps x into (-period/2, period/2].
double circular(double x, double period) {
    double r = std::fmod(x, period);
    if (r > 0.5 * period) {
        r -= period;
    } else if (r <= -0.5 * period) {
        r += period;
    }
    return r;
}

Vec2 left_normal(double heading) { return {-std::sin(heading), std::cos(heading)}; }

} // namespace

const char* to_string(EpisodeStatus status) {
    switch (status) {
    case EpisodeStatus::Running:
        return "running";
    case EpisodeStatus::FailedOffTrack:
        return "failed_off_track";
    case EpisodeStatus::CompletedLap:
        return "completed_lap";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------------------------
// Polyline

Polyline::Polyline(std::vector<Vec2> points, bool closed) : points_(std::move(points)), closed_(closed) {
    if (points_.size() < 2) {
        throw MalformedTrack("a polyline needs at least two points");
    }
    if (closed_ && !(points_.front() == points_.back())) {
        points_.push_back(points_.front());
    }
    cumulative_.reserve(points_.size());
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double d = distance(points_[i - 1], points_[i]);
        if (d < 1e-12) {
            throw MalformedTrack("consecutive points coincide");
        }
        cumulative_.push_back(cumulative_.back() + d);
    }
}

std::size_t Polyline::segment_index(double s) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    if (it == cumulative_.begin()) {
        return 0;
    }
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    return std::min(idx, segment_count() - 1);
}

Vec2 Polyline::point_at(double s) const {
    if (closed_) {
        s = std::fmod(s, length());
        if (s < 0) {
            s += length();
        }
    }
    const std::size_t i = segment_index(s);
    const Vec2 a = points_[i];
    const Vec2 b = points_[i + 1];
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    return a + ((s - cumulative_[i]) / seg_len) * (b - a);
}

double Polyline::heading_at(double s) const {
    if (closed_) {
        s = std::fmod(s, length());
        if (s < 0) {
            s += length();
        }
    }
    const std::size_t i = segment_index(s);
    const Vec2 d = points_[i + 1] - points_[i];
    return std::atan2(d.y, d.x);
}

Projection Polyline::project(Vec2 p) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const Vec2 a = points_[i];
        const Vec2 d = points_[i + 1] - a;
        const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
        const Vec2 q = a + t * d;
        const double dist = distance(p, q);
        if (dist < best.distance) {
            best = {cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]), dist, q, i};
        }
    }
    return best;
}

Projection Polyline::project_near(Vec2 p, double arc_hint, double window) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    bool found = false;
    const double total = length();
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const double lo = cumulative_[i];
        const double hi = cumulative_[i + 1];
        double gap = 0.0;
        if (closed_) {
            const double mid = 0.5 * (lo + hi);
            gap = std::max(0.0, std::abs(circular(arc_hint - mid, total)) - 0.5 * (hi - lo));
        } else if (arc_hint < lo) {
            gap = lo - arc_hint;
        } else if (arc_hint > hi) {
            gap = arc_hint - hi;
        }
        if (gap > window) {
            continue;
        }
        const Vec2 a = points_[i];
        const Vec2 d = points_[i + 1] - a;
        const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
        const Vec2 q = a + t * d;
        const double dist = distance(p, q);
        if (dist < best.distance) {
            best = {lo + t * (hi - lo), dist, q, i};
            found = true;
        }
    }
    return found ? best : project(p);
}

// ---------------------------------------------------------------------------------------------
// Track

namespace {

bool infer_closed(const std::vector<Cone>& side) {
    double max_step = 0.0;
    for (std::size_t i = 1; i < side.size(); ++i) {
        max_step = std::max(max_step, distance(side[i - 1].position(), side[i].position()));
    }
    return side.size() >= 3 &&
           distance(side.front().position(), side.back().position()) <= 1.5 * max_step;
}

std::vector<Vec2> positions(const std::vector<Cone>& cones) {
    std::vector<Vec2> out;
    out.reserve(cones.size());
    for (const auto& c : cones) {
        out.push_back(c.position());
    }
    return out;
}

} // namespace

Track Track::from_cones(std::vector<Cone> blue, std::vector<Cone> yellow, Pose2 start_pose,
                        LineSegment finish_line, std::optional<bool> closed) {
    if (blue.size() < 2 || yellow.size() < 2) {
        throw MalformedTrack("each boundary needs at least two cones");
    }
    for (const auto& c : blue) {
        if (c.colour != ConeColour::Blue) {
            throw MalformedTrack("left boundary contains a non-blue cone");
        }
    }
    for (const auto& c : yellow) {
        if (c.colour != ConeColour::Yellow) {
            throw MalformedTrack("right boundary contains a non-yellow cone");
        }
    }
    Track t;
    t.closed_ = closed.value_or(infer_closed(blue) && infer_closed(yellow));
    if (t.closed_ && (blue.size() < 3 || yellow.size() < 3)) {
        throw MalformedTrack("a closed track needs at least three cones per side");
    }
    t.blue_ = std::move(blue);
    t.yellow_ = std::move(yellow);
    t.start_ = start_pose;
    t.finish_ = finish_line;

    const Polyline left(positions(t.blue_), t.closed_);
    const Polyline right(positions(t.yellow_), t.closed_);

    std::vector<Vec2> mid;
    if (t.blue_.size() == t.yellow_.size()) {
        for (std::size_t i = 0; i < t.blue_.size(); ++i) {
            mid.push_back(0.5 * (t.blue_[i].position() + t.yellow_[i].position()));
        }
    } else {
        for (const auto& c : t.blue_) {
            mid.push_back(0.5 * (c.position() + right.project(c.position()).point));
        }
    }
    t.centerline_ = Polyline(std::move(mid), t.closed_);

    for (const Polyline* side : {&left, &right}) {
        for (std::size_t i = 0; i < side->segment_count(); ++i) {
            t.corridor_.push_back(side->segment(i));
        }
    }
    const std::size_t side_edges = t.corridor_.size();
    if (!t.closed_) {
        t.corridor_.push_back({t.blue_.front().position(), t.yellow_.front().position()});
        t.corridor_.push_back({t.blue_.back().position(), t.yellow_.back().position()});
    }

    for (const Vec2& p : t.centerline_.points()) {
        double nearest = std::numeric_limits<double>::infinity();
        // Open tracks start and end on their caps, so only the cone rows count here.
        for (std::size_t i = 0; i < side_edges; ++i) {
            nearest = std::min(nearest, segment_distance(p, t.corridor_[i]));
        }
        if (!point_inside(t, p) || nearest <= kOnBoundary) {
            throw MalformedTrack("centerline leaves the corridor");
        }
    }
    t.finish_arc_ = t.centerline_.project(0.5 * (finish_line.a + finish_line.b)).arc;
    return t;
}

std::pair<Polyline, Polyline> boundary_polylines(const Track& track) {
    return {Polyline(positions(track.blue_cones()), track.closed()),
            Polyline(positions(track.yellow_cones()), track.closed())};
}

bool point_inside(const Track& track, Vec2 p) {
    bool inside = false;
    for (const auto& e : track.corridor_edges()) {
        if (segment_distance(p, e) <= kOnBoundary) {
            return true;
        }
        if ((e.a.y > p.y) != (e.b.y > p.y)) {
            const double x_cross = e.a.x + (p.y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

std::vector<Vec2> wheel_positions(const VehicleState& s, const VehicleParams& params) {
    const Vec2 c{s.pos_x, s.pos_y};
    const Vec2 fwd{std::cos(s.yaw), std::sin(s.yaw)};
    const Vec2 left = left_normal(s.yaw);
    const double half = 0.5 * params.track_width;
    const Vec2 front = c + params.dist_cg_front * fwd;
    const Vec2 rear = c - params.dist_cg_rear * fwd;
    return {front + half * left, front - half * left, rear + half * left, rear - half * left};
}

bool vehicle_off_track(const Track& track, const VehicleState& state, const VehicleParams& params) {
    for (const Vec2& w : wheel_positions(state, params)) {
        if (point_inside(track, w)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Progress

ProgressTracker::ProgressTracker(const Track& track) : track_(&track) {
    if (track.closed()) {
        origin_ = track.finish_arc();
        span_ = track.total_length();
    } else {
        origin_ = track.centerline().project(track.start_pose().position()).arc;
        span_ = track.finish_arc() - origin_;
        if (span_ <= 0) {
            throw MalformedTrack("finish line lies behind the start pose");
        }
    }
}

void ProgressTracker::add(Vec2 p) {
    const Polyline& line = track_->centerline();
    if (!started_) {
        const Projection proj = line.project(p);
        last_arc_ = proj.arc;
        unwrapped_ = track_->closed() ? circular(proj.arc - origin_, line.length()) : proj.arc - origin_;
        best_ = unwrapped_;
        last_point_ = p;
        started_ = true;
        return;
    }

    const LineSegment& f = track_->finish_line();
    const Vec2 e = f.b - f.a;
    const double side_prev = cross(e, last_point_ - f.a);
    const double side_now = cross(e, p - f.a);
    if (side_prev < 0.0 && side_now >= 0.0) {
        const double t = side_prev / (side_prev - side_now);
        const Vec2 hit = last_point_ + t * (p - last_point_);
        const double u = dot(hit - f.a, e) / dot(e, e);
        if (u >= 0.0 && u <= 1.0) {
            ++crossings_;
        }
    }

    const double window = 5.0 + 2.0 * distance(last_point_, p);
    const Projection proj = line.project_near(p, last_arc_, window);
    const double ds = track_->closed() ? circular(proj.arc - last_arc_, line.length()) : proj.arc - last_arc_;
    unwrapped_ += ds;
    last_arc_ = proj.arc;
    best_ = std::max(best_, unwrapped_);
    last_point_ = p;
}

double ProgressTracker::progress() const {
    if (completed()) {
        return 1.0;
    }
    return std::clamp(best_ / span_, 0.0, std::nextafter(1.0, 0.0));
}

double lap_progress(const Track& track, std::span<const Vec2> trajectory) {
    ProgressTracker tracker(track);
    for (const Vec2& p : trajectory) {
        tracker.add(p);
    }
    return tracker.progress();
}

int finish_crossings(const Track& track, std::span<const Vec2> trajectory) {
    ProgressTracker tracker(track);
    for (const Vec2& p : trajectory) {
        tracker.add(p);
    }
    return tracker.crossings();
}

// ---------------------------------------------------------------------------------------------
// Transformations

Track invert_track(const Track& track) {
    if (!track.closed()) {
        throw MalformedTrack("only closed tracks can be inverted");
    }
    // Keep cone 0 (at the finish line) first and reverse the rest.
    auto reversed = [](const std::vector<Cone>& side, ConeColour colour) {
        std::vector<Cone> out;
        out.reserve(side.size());
        out.push_back({side.front().x, side.front().y, colour});
        for (std::size_t i = side.size() - 1; i >= 1; --i) {
            out.push_back({side[i].x, side[i].y, colour});
        }
        return out;
    };
    std::vector<Cone> blue = reversed(track.yellow_cones(), ConeColour::Blue);
    std::vector<Cone> yellow = reversed(track.blue_cones(), ConeColour::Yellow);

    const Polyline& line = track.centerline();
    const Pose2& start = track.start_pose();
    const Projection proj = line.project(start.position());
    const double heading = line.heading_at(proj.arc);
    const double lateral = cross(Vec2{std::cos(heading), std::sin(heading)}, start.position() - proj.point);
    const double heading_error = wrap_angle(start.yaw - heading);
    const double lead = circular(track.finish_arc() - proj.arc, line.length());

    const double new_arc = track.finish_arc() + lead;
    const double new_heading = line.heading_at(new_arc);
    const Vec2 pos = line.point_at(new_arc) + lateral * left_normal(new_heading);
    const Pose2 new_start{pos.x, pos.y, wrap_angle(new_heading + std::numbers::pi - heading_error)};

    const LineSegment finish{track.finish_line().b, track.finish_line().a};
    return Track::from_cones(std::move(blue), std::move(yellow), new_start, finish, true);
}

Track scale_track(const Track& track, double factor) {
    if (!(factor > 0.0)) {
        throw ConfigError("scale factor must be positive");
    }
    auto scaled = [factor](const std::vector<Cone>& side) {
        std::vector<Cone> out = side;
        for (auto& c : out) {
            c.x *= factor;
            c.y *= factor;
        }
        return out;
    };
    const Pose2& s = track.start_pose();
    const LineSegment& f = track.finish_line();
    return Track::from_cones(scaled(track.blue_cones()), scaled(track.yellow_cones()),
                             {s.x * factor, s.y * factor, s.yaw},
                             {factor * f.a, factor * f.b}, track.closed());
}

std::vector<double> centerline_turning(const Track& track) {
    const auto& pts = track.centerline().points();
    const std::size_t n = pts.size();
    std::vector<double> out;
    auto heading = [&](std::size_t i) {
        const Vec2 d = pts[i + 1] - pts[i];
        return std::atan2(d.y, d.x);
    };
    if (track.closed()) {
        const std::size_t segs = n - 1;
        for (std::size_t v = 0; v < segs; ++v) {
            const std::size_t before = (v + segs - 1) % segs;
            out.push_back(wrap_angle(heading(v) - heading(before)));
        }
    } else {
        for (std::size_t v = 1; v + 1 < n; ++v) {
            out.push_back(wrap_angle(heading(v) - heading(v - 1)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Generators

namespace {

struct PathPiece {
    double length;
    double curvature;  // signed, left positive; zero for straights
};

// Chain of straights and circular arcs starting at the origin heading along +x.
class TurtlePath {
public:
    explicit TurtlePath(std::vector<PathPiece> pieces) : pieces_(std::move(pieces)) {}

    double length() const {
        double total = 0.0;
        for (const auto& p : pieces_) {
            total += p.length;
        }
        return total;
    }

    Pose2 at(double s) const {
        Vec2 pos{0.0, 0.0};
        double heading = 0.0;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const PathPiece& piece = pieces_[i];
            const bool last = i + 1 == pieces_.size();
            const double t = last ? s : std::min(s, piece.length);
            pos = advance(pos, heading, piece.curvature, t);
            heading += piece.curvature * t;
            s -= t;
            if (s <= 0.0) {
                break;
            }
        }
        return {pos.x, pos.y, wrap_angle(heading)};
    }

private:
    static Vec2 advance(Vec2 pos, double heading, double k, double t) {
        if (k == 0.0) {
            return pos + t * Vec2{std::cos(heading), std::sin(heading)};
        }
        return pos + Vec2{(std::sin(heading + k * t) - std::sin(heading)) / k,
                          (std::cos(heading) - std::cos(heading + k * t)) / k};
    }

    std::vector<PathPiece> pieces_;
};

PathPiece straight_piece(double length) { return {length, 0.0}; }

PathPiece arc_piece(double angle_deg, double radius) {
    const double k = (angle_deg > 0 ? 1.0 : -1.0) / radius;
    return {std::abs(deg_to_rad(angle_deg)) * radius, k};
}

void check_geometry(double spacing, double width) {
    if (!(spacing > 0.0) || !(width > 0.0)) {
        throw ConfigError("cone spacing and track width must be positive");
    }
}

Cone cone_at(const Pose2& pose, double offset, ConeColour colour) {
    const Vec2 p = pose.position() + offset * left_normal(pose.yaw);
    return {p.x, p.y, colour};
}

Track open_track_from_path(const TurtlePath& path, double spacing, double width) {
    check_geometry(spacing, width);
    const double length = path.length();
    const int n = std::max(1, static_cast<int>(std::lround(length / spacing)));
    std::vector<Cone> blue;
    std::vector<Cone> yellow;
    for (int k = 0; k <= n; ++k) {
        const Pose2 pose = path.at(length * k / n);
        blue.push_back(cone_at(pose, 0.5 * width, ConeColour::Blue));
        yellow.push_back(cone_at(pose, -0.5 * width, ConeColour::Yellow));
    }
    const LineSegment finish{blue.back().position(), yellow.back().position()};
    return Track::from_cones(std::move(blue), std::move(yellow), path.at(0.0), finish, false);
}

Track closed_track_from_path(const TurtlePath& path, double finish_arc, double start_lead,
                             double spacing, double width) {
    check_geometry(spacing, width);
    const double length = path.length();
    const int n = std::max(3, static_cast<int>(std::lround(length / spacing)));
    std::vector<Cone> blue;
    std::vector<Cone> yellow;
    for (int k = 0; k < n; ++k) {
        const Pose2 pose = path.at(std::fmod(finish_arc + length * k / n, length));
        blue.push_back(cone_at(pose, 0.5 * width, ConeColour::Blue));
        yellow.push_back(cone_at(pose, -0.5 * width, ConeColour::Yellow));
    }
    const LineSegment finish{blue.front().position(), yellow.front().position()};
    return Track::from_cones(std::move(blue), std::move(yellow), path.at(finish_arc - start_lead),
                             finish, true);
}

} // namespace

Track straight_track(double length, double spacing, double width) {
    if (!(length > 0.0)) {
        throw ConfigError("straight length must be positive");
    }
    return open_track_from_path(TurtlePath({straight_piece(length)}), spacing, width);
}

Track arc_track(double angle_deg, double radius, double spacing, double width) {
    if (!(radius > 0.0) || angle_deg == 0.0 || std::abs(angle_deg) >= 360.0) {
        throw ConfigError("arc needs a positive radius and a sweep in (0, 360) degrees");
    }
    if (0.5 * width >= radius) {
        throw ConfigError("arc radius must exceed half the track width");
    }
    return open_track_from_path(TurtlePath({arc_piece(angle_deg, radius)}), spacing, width);
}

Track oval_track(double straight_length, double radius, double spacing, double width) {
    if (!(straight_length > 0.0) || !(radius > 0.0) || 0.5 * width >= radius) {
        throw ConfigError("oval needs positive straights and a radius above half the width");
    }
    const TurtlePath path({straight_piece(straight_length), arc_piece(-180.0, radius),
                           straight_piece(straight_length), arc_piece(-180.0, radius)});
    const double finish = std::min(10.0, 0.5 * straight_length);
    return closed_track_from_path(path, finish, 0.6 * finish, spacing, width);
}

Track fsg_like_track(double spacing, double width) {
    // Two straights are left free and solved so that the loop closes exactly.
    auto pieces = [](double a, double b) {
        return std::vector<PathPiece>{
            straight_piece(a),   arc_piece(-90.0, 10.0), straight_piece(b),
            arc_piece(-130.0, 6.0), straight_piece(10.0),  arc_piece(90.0, 11.0),
            straight_piece(20.0),  arc_piece(-60.0, 12.0), straight_piece(90.0),
            arc_piece(-170.0, 20.0),
        };
    };
    auto end_of = [&](double a, double b) {
        const TurtlePath p(pieces(a, b));
        return p.at(p.length()).position();
    };
    const Vec2 base = end_of(0.0, 0.0);
    const Vec2 da = end_of(1.0, 0.0) - base;
    const Vec2 db = end_of(0.0, 1.0) - base;
    const double det = cross(da, db);
    const double a = cross(-1.0 * base, db) / det;
    const double b = cross(da, -1.0 * base) / det;
    return closed_track_from_path(TurtlePath(pieces(a, b)), 10.0, 6.0, spacing, width);
}

Track generate_primitive_track(PrimitiveKind kind, const PrimitiveParams& p) {
    switch (kind) {
    case PrimitiveKind::Straight:
        return straight_track(p.length, p.spacing, p.width);
    case PrimitiveKind::Arc:
        return arc_track(p.angle_deg, p.radius, p.spacing, p.width);
    case PrimitiveKind::Oval:
        return oval_track(p.length, p.radius, p.spacing, p.width);
    case PrimitiveKind::FsgLike:
        return fsg_like_track(p.spacing, p.width);
    }
    throw ConfigError("unknown track kind");
}

std::vector<std::pair<std::string, Track>> feature_tracks(double scale, double width) {
    constexpr double spacing = 1.5;
    std::vector<std::pair<std::string, Track>> out;
    out.emplace_back("straight", scale_track(straight_track(6.0, spacing, width), scale));
    out.emplace_back("left", scale_track(arc_track(90.0, 5.5, spacing, width), scale));
    out.emplace_back("tight_right", scale_track(arc_track(-130.0, 3.0, spacing, width), scale));
    out.emplace_back("loose_right", scale_track(arc_track(-60.0, 6.0, spacing, width), scale));
    return out;
}

// ---------------------------------------------------------------------------------------------
// File format

void write_track(std::ostream& out, const Track& track) {
    const Pose2& s = track.start_pose();
    const LineSegment& f = track.finish_line();
    out << "start," << format_double(s.x) << ',' << format_double(s.y) << ','
        << format_double(s.yaw) << '\n';
    out << "finish," << format_double(f.a.x) << ',' << format_double(f.a.y) << ','
        << format_double(f.b.x) << ',' << format_double(f.b.y) << '\n';
    for (const auto& c : track.blue_cones()) {
        out << "cone," << format_double(c.x) << ',' << format_double(c.y) << ",B\n";
    }
    for (const auto& c : track.yellow_cones()) {
        out << "cone," << format_double(c.x) << ',' << format_double(c.y) << ",Y\n";
    }
}

Track read_track(std::istream& in) {
    std::vector<Cone> blue;
    std::vector<Cone> yellow;
    std::optional<Pose2> start;
    std::optional<LineSegment> finish;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = split(text, ',');
        const std::string_view kind = trim(fields[0]);
        try {
            if (kind == "cone" && fields.size() == 4) {
                const std::string_view colour = trim(fields[3]);
                const double x = parse_double(fields[1]);
                const double y = parse_double(fields[2]);
                if (colour == "B") {
                    blue.push_back({x, y, ConeColour::Blue});
                } else if (colour == "Y") {
                    yellow.push_back({x, y, ConeColour::Yellow});
                } else {
                    throw CorruptFile("cone colour must be B or Y");
                }
            } else if (kind == "start" && fields.size() == 4) {
                start = Pose2{parse_double(fields[1]), parse_double(fields[2]), parse_double(fields[3])};
            } else if (kind == "finish" && fields.size() == 5) {
                finish = LineSegment{{parse_double(fields[1]), parse_double(fields[2])},
                                     {parse_double(fields[3]), parse_double(fields[4])}};
            } else {
                throw CorruptFile("unrecognised record");
            }
        } catch (const CorruptFile& e) {
            throw CorruptFile("track line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!start || !finish) {
        throw CorruptFile("track file needs start and finish records");
    }
    return Track::from_cones(std::move(blue), std::move(yellow), *start, *finish);
}

void save_track(const std::string& path, const Track& track) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write_track(out, track);
}

Track load_track(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    return read_track(in);
}

} // namespace conetrack
