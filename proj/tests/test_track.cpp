#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "conetrack/errors.hpp"
#include "conetrack/track.hpp"
#include "track_oracle.hpp"

using namespace conetrack;

namespace {

std::vector<Vec2> along_centerline(const Track& t, double from, double to, double step = 0.2) {
    std::vector<Vec2> out;
    for (double s = from; s < to; s += step) {
        out.push_back(t.centerline().point_at(s));
    }
    out.push_back(t.centerline().point_at(to));
    return out;
}

void expect_tracks_equal(const Track& a, const Track& b, double tol) {
    ASSERT_EQ(a.blue_cones().size(), b.blue_cones().size());
    ASSERT_EQ(a.yellow_cones().size(), b.yellow_cones().size());
    for (std::size_t i = 0; i < a.blue_cones().size(); ++i) {
        EXPECT_NEAR(a.blue_cones()[i].x, b.blue_cones()[i].x, tol);
        EXPECT_NEAR(a.blue_cones()[i].y, b.blue_cones()[i].y, tol);
    }
    for (std::size_t i = 0; i < a.yellow_cones().size(); ++i) {
        EXPECT_NEAR(a.yellow_cones()[i].x, b.yellow_cones()[i].x, tol);
        EXPECT_NEAR(a.yellow_cones()[i].y, b.yellow_cones()[i].y, tol);
    }
    const auto& pa = a.centerline().points();
    const auto& pb = b.centerline().points();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_NEAR(pa[i].x, pb[i].x, tol);
        EXPECT_NEAR(pa[i].y, pb[i].y, tol);
    }
    EXPECT_NEAR(a.start_pose().x, b.start_pose().x, tol);
    EXPECT_NEAR(a.start_pose().y, b.start_pose().y, tol);
    EXPECT_NEAR(std::remainder(a.start_pose().yaw - b.start_pose().yaw, 2 * std::numbers::pi), 0.0, tol);
    EXPECT_NEAR(a.finish_line().a.x, b.finish_line().a.x, tol);
    EXPECT_NEAR(a.finish_line().b.y, b.finish_line().b.y, tol);
}

} // namespace

TEST(Polyline, ArcLengthAndPointAt) {
    const Polyline open({{0, 0}, {3, 0}, {3, 4}}, false);
    EXPECT_DOUBLE_EQ(open.length(), 7.0);
    EXPECT_EQ(open.point_at(5.0), (Vec2{3, 2}));
    const Polyline closed({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true);
    EXPECT_DOUBLE_EQ(closed.length(), 4.0);
    EXPECT_EQ(closed.points().front(), closed.points().back());
    EXPECT_EQ(closed.point_at(4.5), (Vec2{0.5, 0}));
    EXPECT_THROW(Polyline({{0, 0}, {0, 0}}, false), MalformedTrack);
}

TEST(Boundaries, MinimalAndClosed) {
    const Track s = straight_track(3.0, 3.0, 3.0);
    const auto [left, right] = boundary_polylines(s);
    EXPECT_EQ(left.segment_count(), 1u);
    EXPECT_EQ(right.segment_count(), 1u);

    const Track f = fsg_like_track();
    const auto [fl, fr] = boundary_polylines(f);
    EXPECT_TRUE(fl.closed());
    EXPECT_EQ(fl.points().front(), fl.points().back());
    EXPECT_EQ(fr.points().front(), fr.points().back());
}

TEST(Boundaries, ArcPolylineLengthNearAnalytic) {
    // 10 cones per side on a 90 degree arc of radius 5.5 and width 3.
    const double radius = 5.5;
    const double sweep = std::numbers::pi / 2;
    const double spacing = radius * sweep / 9.0;
    const Track t = arc_track(90.0, radius, spacing, 3.0);
    ASSERT_EQ(t.blue_cones().size(), 10u);
    const auto [left, right] = boundary_polylines(t);
    // A left turn puts the blue row on the inside.
    EXPECT_NEAR(left.length(), (radius - 1.5) * sweep, 0.02 * (radius - 1.5) * sweep);
    EXPECT_NEAR(right.length(), (radius + 1.5) * sweep, 0.02 * (radius + 1.5) * sweep);
}

TEST(Generators, PaperDimensions) {
    const Track s = straight_track(6.0, 2.0, 3.0);
    EXPECT_EQ(s.blue_cones().size(), 4u);
    EXPECT_EQ(s.yellow_cones().size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(s.blue_cones()[i].y - s.yellow_cones()[i].y, 3.0, 1e-12);
    }
    EXPECT_FALSE(s.closed());

    const Track left = arc_track(90.0, 5.5, 0.5, 3.0);
    EXPECT_NEAR(left.total_length(), std::numbers::pi / 2 * 5.5, 0.01);

    const Track oval = oval_track(20.0, 8.0);
    EXPECT_TRUE(oval.closed());
    EXPECT_NEAR(oval.total_length(), 40.0 + 16.0 * std::numbers::pi, 0.01 * 90.27);

    const Track fsg = fsg_like_track();
    EXPECT_TRUE(fsg.closed());
    EXPECT_NEAR(fsg.total_length(), 400.0, 25.0);
}

TEST(Generators, RejectBadGeometry) {
    EXPECT_THROW(straight_track(6.0, 0.0, 3.0), ConfigError);
    EXPECT_THROW(straight_track(6.0, 2.0, -1.0), ConfigError);
    EXPECT_THROW(arc_track(90.0, 1.0, 1.0, 3.0), ConfigError);
    EXPECT_THROW(oval_track(-1.0, 8.0), ConfigError);
}

TEST(Generators, FsgLikeHasPaperFeatures) {
    const Track t = fsg_like_track(1.0);
    // Accumulate turning between straight stretches to recover the corner sweeps.
    std::vector<double> corners;
    double acc = 0.0;
    for (double turn : centerline_turning(t)) {
        if (std::abs(turn) < 1e-6) {
            if (std::abs(acc) > 0.1) {
                corners.push_back(rad_to_deg(acc));
            }
            acc = 0.0;
        } else {
            acc += turn;
        }
    }
    auto has = [&](double sweep) {
        for (double c : corners) {
            if (std::abs(c - sweep) < 5.0) {
                return true;
            }
        }
        return false;
    };
    EXPECT_TRUE(has(90.0));
    EXPECT_TRUE(has(-130.0));
    EXPECT_TRUE(has(-60.0));
}

TEST(Generators, FeatureTracksScale) {
    const auto half = feature_tracks(1.0);
    ASSERT_EQ(half.size(), 4u);
    EXPECT_EQ(half[0].first, "straight");
    EXPECT_NEAR(half[0].second.total_length(), 6.0, 1e-9);
    const double tight = 130.0 * std::numbers::pi / 180 * 3.0;
    EXPECT_NEAR(half[2].second.total_length(), tight, 0.01 * tight);
    const auto doubled = feature_tracks(2.0);
    EXPECT_NEAR(doubled[0].second.total_length(), 12.0, 1e-9);
}

TEST(PointInside, SimpleCases) {
    const Track t = oval_track(20.0, 8.0);
    for (const Vec2& p : t.centerline().points()) {
        EXPECT_TRUE(point_inside(t, p));
    }
    // 10 m outside the outer (left) boundary of the clockwise oval.
    const Vec2 far{10.0, 40.0};
    EXPECT_FALSE(point_inside(t, far));
    const auto& e = t.corridor_edges().front();
    EXPECT_TRUE(point_inside(t, 0.5 * (e.a + e.b)));
    EXPECT_TRUE(point_inside(t, e.a));
}

class PointInsideRaster : public ::testing::TestWithParam<int> {};

TEST_P(PointInsideRaster, AgreesWithRasterOracle) {
    std::vector<Track> tracks{oval_track(20.0, 8.0), fsg_like_track()};
    for (auto& [name, t] : feature_tracks(2.0)) {
        tracks.push_back(t);
    }
    const Track& t = tracks.at(static_cast<std::size_t>(GetParam()));
    const double cell = 0.01;
    const test_oracle::RasterOracle oracle(t, cell);
    std::mt19937_64 rng(100 + GetParam());
    const auto box = oracle.bounds();
    std::uniform_real_distribution<double> ux(box.first.x - 2, box.second.x + 2);
    std::uniform_real_distribution<double> uy(box.first.y - 2, box.second.y + 2);
    int agree = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        if (point_inside(t, p) == oracle.inside(p)) {
            ++agree;
            continue;
        }
        double nearest = 1e9;
        for (const auto& e : t.corridor_edges()) {
            const Vec2 d = e.b - e.a;
            const double u = std::clamp(dot(p - e.a, d) / dot(d, d), 0.0, 1.0);
            nearest = std::min(nearest, distance(p, e.a + u * d));
        }
        EXPECT_LE(nearest, std::sqrt(2.0) * cell);
    }
    EXPECT_GE(agree, static_cast<int>(0.999 * n));
}

INSTANTIATE_TEST_SUITE_P(AllTracks, PointInsideRaster, ::testing::Range(0, 6));

TEST(VehicleOffTrack, Cases) {
    const Track t = straight_track(30.0, 3.0, 3.0);
    VehicleParams p;
    VehicleState s;
    s.pos_x = 10.0;
    EXPECT_FALSE(vehicle_off_track(t, s, p));
    s.pos_y = 10.0;
    EXPECT_TRUE(vehicle_off_track(t, s, p));
    // Centred on the right boundary: the left wheels are in, the right wheels out.
    s.pos_y = -1.5;
    EXPECT_FALSE(vehicle_off_track(t, s, p));
    const auto wheels = wheel_positions(s, p);
    EXPECT_FALSE(point_inside(t, wheels[1]));
    EXPECT_TRUE(point_inside(t, wheels[0]));
}

TEST(VehicleOffTrack, NeverOnCenterline) {
    VehicleParams p;
    for (const Track& t : {oval_track(20.0, 8.0), fsg_like_track()}) {
        const Polyline& c = t.centerline();
        for (double s = 0; s < c.length(); s += 0.5) {
            VehicleState v;
            const Vec2 q = c.point_at(s);
            v.pos_x = q.x;
            v.pos_y = q.y;
            v.yaw = c.heading_at(s);
            EXPECT_FALSE(vehicle_off_track(t, v, p));
        }
    }
}

TEST(LapProgress, StartIsZeroAndHalfway) {
    const Track arc = arc_track(90.0, 5.5, 0.5, 3.0);
    const std::vector<Vec2> start{arc.start_pose().position()};
    EXPECT_EQ(lap_progress(arc, start), 0.0);
    const auto half = along_centerline(arc, 0.0, 0.5 * arc.total_length());
    EXPECT_NEAR(lap_progress(arc, half), 0.5, 0.01);

    const Track oval = oval_track(20.0, 8.0);
    const double f = oval.finish_arc();
    const std::vector<Vec2> ostart{oval.start_pose().position()};
    EXPECT_EQ(lap_progress(oval, ostart), 0.0);
    const auto ohalf = along_centerline(oval, f - 6.0, f + 0.5 * oval.total_length());
    EXPECT_NEAR(lap_progress(oval, ohalf), 0.5, 0.01);
}

TEST(LapProgress, FullLapReachesOneAfterSecondCrossing) {
    const Track t = fsg_like_track();
    const double f = t.finish_arc();
    const double L = t.total_length();
    const auto almost = along_centerline(t, f - 6.0, f + L - 1.0);
    EXPECT_EQ(finish_crossings(t, almost), 1);
    EXPECT_LT(lap_progress(t, almost), 1.0);
    EXPECT_GT(lap_progress(t, almost), 0.99);
    const auto full = along_centerline(t, f - 6.0, f + L + 1.0);
    EXPECT_EQ(finish_crossings(t, full), 2);
    EXPECT_EQ(lap_progress(t, full), 1.0);
}

TEST(FinishCrossings, DirectionMatters) {
    const Track t = oval_track(20.0, 8.0);
    const double f = t.finish_arc();
    const auto c = [&](double s) { return t.centerline().point_at(s); };
    const std::vector<Vec2> away{c(f + 20), c(f + 25)};
    EXPECT_EQ(finish_crossings(t, away), 0);
    const std::vector<Vec2> once{c(f - 1), c(f + 1)};
    EXPECT_EQ(finish_crossings(t, once), 1);
    const std::vector<Vec2> back_and_forth{c(f - 1), c(f + 1), c(f - 1), c(f + 1)};
    EXPECT_EQ(finish_crossings(t, back_and_forth), 2);
    // Passing beside the finish segment does not count.
    const Vec2 n{0.0, 1.0};
    const std::vector<Vec2> outside{c(f - 1) + 5.0 * n, c(f + 1) + 5.0 * n};
    EXPECT_EQ(finish_crossings(t, outside), 0);
}

TEST(LapProgress, MonotoneOnRandomTrajectories) {
    const Track t = fsg_like_track();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::uniform_real_distribution<double> step(-0.5, 1.5);
    const double f = t.finish_arc();
    for (int run = 0; run < 100; ++run) {
        ProgressTracker tracker(t);
        double s = f - 6.0;
        tracker.add(t.start_pose().position());
        double prev = tracker.progress();
        for (int i = 0; i < 400; ++i) {
            s += step(rng);
            const Vec2 p = t.centerline().point_at(s) + Vec2{noise(rng), noise(rng)};
            tracker.add(p);
            const double now = tracker.progress();
            ASSERT_GE(now, prev);
            ASSERT_LE(now, 1.0);
            prev = now;
        }
    }
}

TEST(InvertTrack, InvolutionAndColourSwap) {
    for (const Track& t : {oval_track(20.0, 8.0), fsg_like_track()}) {
        const Track inv = invert_track(t);
        EXPECT_EQ(inv.blue_cones().size(), t.yellow_cones().size());
        EXPECT_EQ(inv.yellow_cones().size(), t.blue_cones().size());
        expect_tracks_equal(invert_track(inv), t, 1e-9);
        // The start still sits just before the finish line in the new direction.
        const std::vector<Vec2> start{inv.start_pose().position()};
        EXPECT_EQ(lap_progress(inv, start), 0.0);
    }
    EXPECT_THROW(invert_track(straight_track(6.0)), MalformedTrack);
}

TEST(InvertTrack, TurningChangesSign) {
    const Track t = fsg_like_track();
    const Track inv = invert_track(t);
    const auto a = centerline_turning(t);
    const auto b = centerline_turning(inv);
    ASSERT_EQ(a.size(), b.size());
    const std::size_t n = a.size();
    for (std::size_t v = 0; v < n; ++v) {
        EXPECT_NEAR(b[v], -a[(n - v) % n], 1e-9);
    }
}

TEST(InvertTrack, ExpertDirectionLapCompletes) {
    // Driving the inverted centerline from its start completes a lap.
    const Track inv = invert_track(oval_track(20.0, 8.0));
    const double L = inv.total_length();
    const double s0 = inv.centerline().project(inv.start_pose().position()).arc;
    const auto lap = along_centerline(inv, s0, s0 + L + 8.0);
    EXPECT_EQ(lap_progress(inv, lap), 1.0);
}

TEST(ScaleTrack, LinearScaling) {
    const Track t = fsg_like_track();
    expect_tracks_equal(scale_track(t, 1.0), t, 0.0);
    EXPECT_NEAR(scale_track(t, 0.5).total_length(), 0.5 * t.total_length(), 1e-9);
    expect_tracks_equal(scale_track(scale_track(t, 2.0), 0.5), t, 1e-12);
    EXPECT_THROW(scale_track(t, 0.0), ConfigError);
}

TEST(TrackFile, RoundTrip) {
    for (const Track& t : {oval_track(20.0, 8.0), arc_track(-130.0, 6.0)}) {
        std::stringstream ss;
        write_track(ss, t);
        const Track back = read_track(ss);
        expect_tracks_equal(back, t, 0.0);
        EXPECT_EQ(back.closed(), t.closed());
        std::stringstream again;
        write_track(again, back);
        std::stringstream first;
        write_track(first, t);
        EXPECT_EQ(again.str(), first.str());
    }
}

TEST(TrackFile, FormatAndErrors) {
    std::stringstream ss;
    write_track(ss, straight_track(3.0, 3.0, 3.0));
    EXPECT_EQ(ss.str(),
              "start,0,0,0\nfinish,3,1.5,3,-1.5\ncone,0,1.5,B\ncone,3,1.5,B\ncone,0,-1.5,Y\ncone,3,-1.5,Y\n");
    std::stringstream bad("start,0,0,0\nfinish,3,1.5,3,-1.5\ncone,0,1.5,R\n");
    EXPECT_THROW(read_track(bad), CorruptFile);
    std::stringstream missing("cone,0,1.5,B\ncone,3,1.5,B\ncone,0,-1.5,Y\ncone,3,-1.5,Y\n");
    EXPECT_THROW(read_track(missing), CorruptFile);
    std::stringstream crossed("start,0,0,0\nfinish,3,1.5,3,-1.5\ncone,0,1.5,B\ncone,3,1.5,B\ncone,0,1.5,Y\ncone,3,1.5,Y\n");
    EXPECT_THROW(read_track(crossed), MalformedTrack);
}
