#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conetrack/dynamics.hpp"
#include "conetrack/geometry.hpp"

namespace conetrack {

enum class ConeColour { Blue, Yellow };

struct Cone {
    double x = 0.0;
    double y = 0.0;
    ConeColour colour = ConeColour::Blue;

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const Cone&, const Cone&) = default;
};

struct LineSegment {
    Vec2 a;
    Vec2 b;
    friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

enum class EpisodeStatus { Running, FailedOffTrack, CompletedLap };

const char* to_string(EpisodeStatus status);

struct Projection {
    double arc = 0.0;       ///< arc length of the closest point
    double distance = 0.0;  ///< distance to the closest point
    Vec2 point;
    std::size_t segment = 0;
};

/// Piecewise-linear curve with cumulative arc length. A closed polyline repeats its first
/// point at the end.
class Polyline {
public:
    Polyline() = default;
    /// Throws MalformedTrack if two consecutive points coincide or fewer than two are given.
    Polyline(std::vector<Vec2> points, bool closed);

    const std::vector<Vec2>& points() const { return points_; }
    const std::vector<double>& cumulative() const { return cumulative_; }
    bool closed() const { return closed_; }
    double length() const { return cumulative_.back(); }
    std::size_t segment_count() const { return points_.size() - 1; }
    LineSegment segment(std::size_t i) const { return {points_[i], points_[i + 1]}; }

    /// Point at arc length `s`. Closed curves wrap; open curves extrapolate along the end tangents.
    Vec2 point_at(double s) const;
    /// Unit tangent heading (radians) of the segment containing `s`.
    double heading_at(double s) const;
    Projection project(Vec2 p) const;
    /// Projection restricted to segments whose arc range lies within `window` of `arc_hint`.
    Projection project_near(Vec2 p, double arc_hint, double window) const;

private:
    std::size_t segment_index(double s) const;

    std::vector<Vec2> points_;
    std::vector<double> cumulative_;
    bool closed_ = false;
};

/// Cone-delimited track. Immutable once constructed.
class Track {
public:
    /// Builds and validates a track. When `closed` is absent the loop flag is inferred from
    /// the gap between the first and last cone of each side.
    static Track from_cones(std::vector<Cone> blue, std::vector<Cone> yellow, Pose2 start_pose,
                            LineSegment finish_line, std::optional<bool> closed = std::nullopt);

    const std::vector<Cone>& blue_cones() const { return blue_; }
    const std::vector<Cone>& yellow_cones() const { return yellow_; }
    const Polyline& centerline() const { return centerline_; }
    const LineSegment& finish_line() const { return finish_; }
    const Pose2& start_pose() const { return start_; }
    bool closed() const { return closed_; }
    double total_length() const { return centerline_.length(); }
    /// Arc position of the finish line on the centerline.
    double finish_arc() const { return finish_arc_; }
    /// Forward finish crossings that complete an episode: two on a loop, one on an open track.
    int required_crossings() const { return closed_ ? 2 : 1; }
    /// Edges of the corridor (both boundaries plus end caps on open tracks).
    const std::vector<LineSegment>& corridor_edges() const { return corridor_; }

private:
    Track() = default;

    std::vector<Cone> blue_;
    std::vector<Cone> yellow_;
    Polyline centerline_;
    LineSegment finish_;
    Pose2 start_;
    bool closed_ = false;
    double finish_arc_ = 0.0;
    std::vector<LineSegment> corridor_;
};

std::pair<Polyline, Polyline> boundary_polylines(const Track& track);

/// True iff `p` lies in the corridor between the boundaries. Boundary points count as inside.
bool point_inside(const Track& track, Vec2 p);

/// Contact points in the order front-left, front-right, rear-left, rear-right.
std::vector<Vec2> wheel_positions(const VehicleState& state, const VehicleParams& params);

/// True iff all four wheels are strictly outside the corridor.
bool vehicle_off_track(const Track& track, const VehicleState& state, const VehicleParams& params);

/// Incremental lap progress and finish-line bookkeeping along a trajectory.
class ProgressTracker {
public:
    explicit ProgressTracker(const Track& track);

    void add(Vec2 p);
    /// Monotone completion fraction; exactly 1.0 once the required finish crossings occurred.
    double progress() const;
    int crossings() const { return crossings_; }
    bool completed() const { return crossings_ >= track_->required_crossings(); }

private:
    const Track* track_;
    bool started_ = false;
    Vec2 last_point_;
    double last_arc_ = 0.0;
    double unwrapped_ = 0.0;
    double best_ = 0.0;
    double origin_ = 0.0;
    double span_ = 1.0;
    int crossings_ = 0;
};

double lap_progress(const Track& track, std::span<const Vec2> trajectory);

/// Forward-direction crossings of the finish line between consecutive trajectory points.
int finish_crossings(const Track& track, std::span<const Vec2> trajectory);

/// Same loop driven the other way with cone colours swapped. The start pose is mirrored along
/// the centerline across the finish line and turned around, so the first crossing still
/// happens right after the start. Throws MalformedTrack on open tracks.
Track invert_track(const Track& track);

Track scale_track(const Track& track, double factor);

/// Signed turning angle at each interior centerline vertex, in traversal order (left positive).
std::vector<double> centerline_turning(const Track& track);

enum class PrimitiveKind { Straight, Arc, Oval, FsgLike };

struct PrimitiveParams {
    double length = 6.0;        ///< straight length, or the oval's straight length
    double angle_deg = 90.0;    ///< arc sweep; positive turns left
    double radius = 5.5;        ///< arc or oval radius
    double spacing = 3.0;       ///< cone spacing along the centerline
    double width = 3.0;         ///< track width between cone rows
};

Track generate_primitive_track(PrimitiveKind kind, const PrimitiveParams& params);

Track straight_track(double length, double spacing = 3.0, double width = 3.0);
Track arc_track(double angle_deg, double radius, double spacing = 3.0, double width = 3.0);
Track oval_track(double straight_length, double radius, double spacing = 3.0, double width = 3.0);
/// Closed loop of roughly 400 m with a long start straight, a 90 degree left, a tight 130
/// degree right and a loose 60 degree right among its corners.
Track fsg_like_track(double spacing = 3.0, double width = 3.0);

/// The four feature tracks (straight, left, tight right, loose right) at their half-scale
/// dimensions, multiplied by `scale`.
std::vector<std::pair<std::string, Track>> feature_tracks(double scale = 1.0, double width = 1.5);

void write_track(std::ostream& out, const Track& track);
Track read_track(std::istream& in);
void save_track(const std::string& path, const Track& track);
Track load_track(const std::string& path);

} // namespace conetrack
