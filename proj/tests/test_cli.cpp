#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "conetrack/config.hpp"
#include "conetrack/errors.hpp"
#include "conetrack/expert.hpp"

using namespace conetrack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("conetrack_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, GenTrackExamples) {
    auto r = run({"gen-track", "straight", "--length", "6", "--width", "3", "--spacing", "2", "-o", path("s.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Track s = load_track(path("s.txt"));
    EXPECT_EQ(s.blue_cones().size(), 4u);
    EXPECT_FALSE(s.closed());

    r = run({"gen-track", "fsg-like", "-o", path("f.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Track f = load_track(path("f.txt"));
    EXPECT_TRUE(f.closed());
    EXPECT_NEAR(f.total_length(), 400.0, 25.0);

    r = run({"gen-track", "arc", "--angle", "-130", "--radius", "3", "-o", path("a.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto turning = centerline_turning(load_track(path("a.txt")));
    double total = 0.0;
    for (double t : turning) total += t;
    EXPECT_LT(total, 0.0);

    r = run({"gen-track", "oval", "--invert", "-o", path("o.txt")});
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, UsageErrorsAreNonZero) {
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"fly"}).code, cli::kUsage);
    EXPECT_EQ(run({"gen-track", "spiral", "-o", path("x")}).code, cli::kUsage);
    EXPECT_EQ(run({"gen-track", "straight", "--spacing", "0", "-o", path("x")}).code, cli::kUsage);
    EXPECT_EQ(run({"gen-track", "straight"}).code, cli::kUsage);
    EXPECT_EQ(run({"record-expert", "-n", "0", "-o", path("d.txt")}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "airl", "-o", path("run")}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "ppo", "-o", path("run")}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "sac", "--set", "env.warp=3", "-o", path("run")}).code, cli::kUsage);
    EXPECT_EQ(run({"eval", "-o", path("e")}).code, cli::kUsage);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, IoAndShapeErrorsAreDistinct) {
    EXPECT_EQ(run({"eval", "--model", path("missing.model"), "-o", path("e")}).code, cli::kIo);
    EXPECT_EQ(run({"train", "sac", "--config", path("missing.ini"), "-o", path("r")}).code, cli::kIo);
    std::ofstream(path("junk.model")) << "garbage";
    EXPECT_EQ(run({"eval", "--model", path("junk.model"), "-o", path("e")}).code, cli::kIo);

    ASSERT_EQ(run({"train", "sac", "--max-episodes", "1", "--progress", "0", "-o", path("r")}).code, 0);
    const auto r = run({"eval", "--run", path("r"), "--set", "sensor.colour_ids=false", "-n", "1", "-o", path("e")});
    EXPECT_EQ(r.code, cli::kShapeMismatch);
    EXPECT_NE(r.err.find("shape"), std::string::npos);
}

TEST_F(CliTest, ExpertFailureIsReported) {
    const auto r = run({"record-expert", "--track", "fsg-like", "--set", "env.speed=20", "--set",
                        "expert.lookahead=30", "-n", "1", "-o", path("d.txt")});
    EXPECT_EQ(r.code, cli::kExpertFailure);
}

TEST_F(CliTest, DivergenceIsReported) {
    const auto r = run({"train", "sac", "--set", "sac.learning_rate=1e300", "--set", "sac.warmup_steps=64",
                        "--set", "sac.batch_size=32", "--max-episodes", "20", "--progress", "0", "-o", path("r")});
    EXPECT_EQ(r.code, cli::kDiverged) << r.out << r.err;
    EXPECT_TRUE(fs::exists(path("r/training_log.csv")));
}

TEST_F(CliTest, RecordExpertMetadata) {
    ASSERT_EQ(run({"record-expert", "-n", "2", "--seed", "17", "-o", path("d.txt")}).code, 0);
    const DemonstrationSet d = load_demonstrations(path("d.txt"));
    EXPECT_EQ(d.episode_boundaries.size(), 2u);
    EXPECT_EQ(d.metadata.seed, 17u);
    EXPECT_EQ(d.metadata.noise, RunConfig{}.env.noise);
    EXPECT_EQ(d.metadata.track_id, "oval");
}

TEST_F(CliTest, RunDirectoryIsSelfContainedAndReproducible) {
    const auto a = run({"train", "sac", "--set", "sac.warmup_steps=100", "--set", "run.checkpoint_every=5", "--set",
                        "sac.actor_hidden=32,32", "--set", "sac.critic_hidden=32,32",
                        "--max-episodes", "12", "--seed", "9", "--progress", "0", "-o", path("a")});
    ASSERT_EQ(a.code, 0) << a.err;
    for (const char* f : {"config.ini", "seed", "version", "training_log.csv", "summary.csv", "actor.model",
                          "track.txt", "checkpoints/actor_000005.model", "checkpoints/actor_000010.model"})
        EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / "seed"), "9\n");
    EXPECT_EQ(load_run_config(path("a/config.ini")).sac.max_episodes, 12);

    ASSERT_EQ(run({"train", "sac", "--config", path("a/config.ini"), "--progress", "0", "-o", path("b")}).code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "training_log.csv"), slurp(dir_ / "b" / "training_log.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "actor.model"), slurp(dir_ / "b" / "actor.model"));
}

TEST_F(CliTest, AirlRunReproducesFromSnapshot) {
    ASSERT_EQ(run({"record-expert", "-n", "2", "-o", path("d.txt")}).code, 0);
    const std::vector<std::string> base{"--set", "airl.rollout_length=60", "--max-episodes", "3", "--progress", "0"};
    std::vector<std::string> first{"train", "airl", "--demos", path("d.txt"), "-o", path("a")};
    first.insert(first.end(), base.begin(), base.end());
    ASSERT_EQ(run(first).code, 0);
    EXPECT_TRUE(fs::exists(path("a/discriminator_g.model")));
    ASSERT_EQ(run({"train", "airl", "--config", path("a/config.ini"), "--demos", path("a/demos.txt"), "--progress",
                   "0", "-o", path("b")})
                  .code,
              0);
    EXPECT_EQ(slurp(dir_ / "a" / "training_log.csv"), slurp(dir_ / "b" / "training_log.csv"));
}

TEST_F(CliTest, EvalOutputsAndInverse) {
    auto r = run({"eval", "--expert", "-n", "3", "--parallel-trials", "2", "--plot", "-o", path("e")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"trials.csv", "summary.csv", "trace.csv", "completion.svg", "steering.svg"})
        EXPECT_TRUE(fs::exists(dir_ / "e" / f)) << f;
    EXPECT_NE(slurp(dir_ / "e" / "summary.csv").find("\n3,1,"), std::string::npos);
    EXPECT_EQ(slurp(dir_ / "e" / "completion.svg").rfind("<svg", 0), 0u);

    r = run({"eval", "--expert", "--inverse", "-n", "2", "-o", path("inv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("(inverse)"), std::string::npos);

    ASSERT_EQ(run({"eval", "--expert", "-n", "3", "--parallel-trials", "1", "-o", path("e1")}).code, 0);
    EXPECT_EQ(slurp(dir_ / "e" / "trials.csv"), slurp(dir_ / "e1" / "trials.csv"));
}

TEST_F(CliTest, SweepGrid) {
    const auto r = run({"sweep", "--expert", "--speeds", "2,4,5", "--dts", "0.1,0.3,1.0", "-n", "1", "--plot", "-o",
                        path("sw")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(dir_ / "sw" / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
    EXPECT_TRUE(fs::exists(dir_ / "sw" / "sweep.svg"));
    EXPECT_EQ(run({"sweep", "--expert", "--speeds", "4,2", "-o", path("bad")}).code, cli::kUsage);
}

TEST(ResolveTrack, NamesAndFiles) {
    EXPECT_TRUE(cli::resolve_track("oval")->closed());
    EXPECT_TRUE(cli::resolve_track("fsg-like")->closed());
    EXPECT_FALSE(cli::resolve_track("tight-right")->closed());
    EXPECT_THROW(cli::resolve_track("/nonexistent/track.txt"), ConfigError);
}
