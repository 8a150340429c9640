#include "commands.hpp"

#include "hybridloc/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace hybridloc;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hybridloc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        config_ = (dir_ / "room.yaml").string();
        write_text_file(config_, write_scenario_config(default_scenario()));
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::vector<std::string>& args) {
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string read(const std::string& name) const { return read_text_file(dir_ / name); }

    fs::path dir_;
    std::string config_;
    std::ostringstream out_;
    std::ostringstream err_;
};

const std::vector<std::string> kSimFiles{"truth.csv", "track.csv", "measurements.csv",
                                         "errors.csv", "cdf.csv", "summary.csv"};

}  // namespace

TEST_F(CliTest, SimWritesSixFiles) {
    ASSERT_EQ(run({"sim", "--config", config_, "--seed", "3", "--out", path("sim"), "--mode", "hybrid"}), 0)
        << err_.str();
    for (const std::string& f : kSimFiles) {
        EXPECT_TRUE(fs::exists(dir_ / "sim" / f)) << f;
    }
}

TEST_F(CliTest, SimMissingConfigIsConfigError) {
    EXPECT_EQ(run({"sim", "--config", path("absent.yaml"), "--out", path("sim")}), 1);
    EXPECT_NE(err_.str().find("absent.yaml"), std::string::npos);
    const std::string err = err_.str();
    EXPECT_EQ(std::count(err.begin(), err.end(), '\n'), 1);
}

TEST_F(CliTest, SimBadModeAndBadFlags) {
    EXPECT_EQ(run({"sim", "--config", config_, "--out", path("sim"), "--mode", "fusion"}), 1);
    EXPECT_EQ(run({"sim", "--config", config_}), 1);
    EXPECT_EQ(run({"frobnicate"}), 1);
}

TEST_F(CliTest, SimSameSeedIsByteIdentical) {
    ASSERT_EQ(run({"sim", "--config", config_, "--seed", "9", "--out", path("a")}), 0);
    ASSERT_EQ(run({"sim", "--config", config_, "--seed", "9", "--out", path("b")}), 0);
    for (const std::string& f : kSimFiles) {
        EXPECT_EQ(read("a/" + f), read("b/" + f)) << f;
    }
    ASSERT_EQ(run({"sim", "--config", config_, "--seed", "10", "--out", path("c")}), 0);
    EXPECT_NE(read("a/measurements.csv"), read("c/measurements.csv"));
    EXPECT_EQ(read("a/truth.csv"), read("c/truth.csv"));
}

TEST_F(CliTest, SweepContract) {
    ASSERT_EQ(run({"sweep", "--config", config_, "--tdoa-rates", "0.25,0.5,10", "--runs", "3", "--out",
                   path("sweep")}),
              0)
        << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / cli::sweep_cdf_name(0.25)));
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / cli::sweep_cdf_name(0.5)));
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / cli::sweep_cdf_name(10)));
    const std::string summary = read("sweep/sweep_summary.csv");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 5);  // header + baseline + 3 rates
    EXPECT_EQ(summary.rfind("rate_hz,median_m,p90_m\nrss_only,", 0), 0u);
}

TEST_F(CliTest, SweepParallelMatchesSerial) {
    ASSERT_EQ(run({"sweep", "--config", config_, "--tdoa-rates", "1,2", "--runs", "4", "--out", path("s1")}), 0);
    ASSERT_EQ(run({"sweep", "--config", config_, "--tdoa-rates", "1,2", "--runs", "4", "--jobs", "3", "--out",
                   path("s3")}),
              0);
    EXPECT_EQ(read("s1/sweep_summary.csv"), read("s3/sweep_summary.csv"));
    EXPECT_EQ(read("s1/" + cli::sweep_cdf_name(2)), read("s3/" + cli::sweep_cdf_name(2)));
}

TEST_F(CliTest, SweepRejectsZeroRuns) {
    EXPECT_EQ(run({"sweep", "--config", config_, "--tdoa-rates", "0.5", "--runs", "0", "--out", path("s")}), 1);
    EXPECT_EQ(run({"sweep", "--config", config_, "--tdoa-rates", "0,0.5", "--runs", "2", "--out", path("s")}), 1);
}

TEST_F(CliTest, ReplayOfSimLogReproducesTrack) {
    for (const std::string mode : {"hybrid", "rss", "tdoa"}) {
        ASSERT_EQ(run({"sim", "--config", config_, "--seed", "5", "--out", path("sim"), "--mode", mode}), 0);
        ASSERT_EQ(run({"replay", "--log", path("sim/measurements.csv"), "--anchors", config_, "--out",
                       path("replay"), "--mode", mode, "--truth", path("sim/truth.csv")}),
                  0)
            << err_.str();
        EXPECT_EQ(read("sim/track.csv"), read("replay/track.csv")) << mode;
        EXPECT_EQ(read("sim/summary.csv"), read("replay/summary.csv")) << mode;
    }
}

TEST_F(CliTest, ReplayRssOnlyLogInHybridModeMatchesRssMode) {
    ASSERT_EQ(run({"sim", "--config", config_, "--seed", "2", "--out", path("sim")}), 0);
    const Feed rss = project_feed(read_measurement_log(read("sim/measurements.csv")), FilterMode::kRssOnly);
    write_text_file(path("rss_log.csv"), write_measurement_log(rss));
    ASSERT_EQ(run({"replay", "--log", path("rss_log.csv"), "--anchors", config_, "--out", path("h"), "--mode",
                   "hybrid"}),
              0);
    ASSERT_EQ(run({"replay", "--log", path("sim/measurements.csv"), "--anchors", config_, "--out", path("r"),
                   "--mode", "rss"}),
              0);
    EXPECT_EQ(read("h/track.csv"), read("r/track.csv"));
}

TEST_F(CliTest, ReplayUnknownAnchorNamesIt) {
    write_text_file(path("log.csv"), "t,kind,anchor_id,ref_anchor_id,value,sigma\n0.1,RSS,ble9,,-50,3\n");
    EXPECT_EQ(run({"replay", "--log", path("log.csv"), "--anchors", config_, "--out", path("r")}), 1);
    EXPECT_NE(err_.str().find("ble9"), std::string::npos);
}

TEST_F(CliTest, ReplayMalformedLogIsConfigError) {
    write_text_file(path("log.csv"), "t,kind,anchor_id,ref_anchor_id,value,sigma\n0.2,RSS,ble1,,-50,3\n0.1,RSS,ble1,,-50,3\n");
    EXPECT_EQ(run({"replay", "--log", path("log.csv"), "--anchors", config_, "--out", path("r")}), 1);
    EXPECT_NE(err_.str().find("line 3"), std::string::npos);
}

TEST_F(CliTest, EvalOfTruthHasZeroMedian) {
    ASSERT_EQ(run({"sim", "--config", config_, "--out", path("sim")}), 0);
    // A track whose positions are the truth samples.
    const GroundTruth gt = scenario_truth(default_scenario());
    Track track;
    for (const TruthSample& s : gt.samples) {
        Belief b;
        b.state << s.position, s.velocity;
        b.timestamp = s.t;
        track.push_back(b);
    }
    write_text_file(path("truth_track.csv"), write_track(track));
    ASSERT_EQ(run({"eval", "--track", path("truth_track.csv"), "--truth", path("sim/truth.csv"), "--out",
                   path("e1")}),
              0);
    EXPECT_NE(read("e1/summary.csv").find("median_m,0\n"), std::string::npos);
}

TEST_F(CliTest, EvalIsRepeatableAndEndsAtOne) {
    ASSERT_EQ(run({"sim", "--config", config_, "--out", path("sim")}), 0);
    for (const std::string out : {"e1", "e2"}) {
        ASSERT_EQ(run({"eval", "--track", path("sim/track.csv"), "--truth", path("sim/truth.csv"), "--out",
                       path(out)}),
                  0);
    }
    for (const std::string f : {"errors.csv", "cdf.csv", "summary.csv"}) {
        EXPECT_EQ(read("e1/" + f), read("e2/" + f));
    }
    // eval over sim's written files agrees with sim's in-memory evaluation up to CSV precision
    const auto summary = [&](const std::string& file) {
        std::istringstream in(read(file));
        std::string line;
        std::getline(in, line);
        std::vector<double> values;
        while (std::getline(in, line)) {
            values.push_back(std::stod(line.substr(line.find(',') + 1)));
        }
        return values;
    };
    const std::vector<double> from_eval = summary("e1/summary.csv");
    const std::vector<double> from_sim = summary("sim/summary.csv");
    ASSERT_EQ(from_eval.size(), from_sim.size());
    for (std::size_t i = 0; i < from_sim.size(); ++i) {
        EXPECT_NEAR(from_eval[i], from_sim[i], 1e-7) << i;
    }
    const std::string cdf = read("e1/cdf.csv");
    const std::string last = cdf.substr(cdf.rfind('\n', cdf.size() - 2) + 1);
    EXPECT_EQ(last.substr(last.find(',') + 1), "1\n");
}

TEST_F(CliTest, EvalEmptyTrackIsConfigError) {
    write_text_file(path("empty.csv"), "t,x,y,vx,vy,var_x,var_y\n");
    write_text_file(path("path.csv"), "x,y\n0,0\n1,0\n");
    EXPECT_EQ(run({"eval", "--track", path("empty.csv"), "--truth", path("path.csv"), "--out", path("e")}), 1);
}

TEST_F(CliTest, DefaultConfigLoads) {
    ASSERT_EQ(run({"default-config"}), 0);
    EXPECT_NO_THROW(load_scenario_config(out_.str()));
}
