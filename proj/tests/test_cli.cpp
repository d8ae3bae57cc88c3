#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bistatic/commands.hpp"
#include "bistatic/experiment_config.hpp"

using namespace bistatic;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("bistatic_test_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST(Config, ParsesKeyValues) {
    const auto kv = parse_key_values("# header\n  runs = 10 \n\nseed=3  # trailing\n");
    ASSERT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv.at("runs"), "10");
    EXPECT_EQ(kv.at("seed"), "3");
}

TEST(Config, RejectsMalformedText) {
    EXPECT_THROW((void)parse_key_values("runs 10\n"), ConfigError);
    EXPECT_THROW((void)parse_key_values("runs = 1\nruns = 2\n"), ConfigError);
    EXPECT_THROW((void)parse_key_values(" = 2\n"), ConfigError);
    EXPECT_THROW((void)load_key_values("/nonexistent/bistatic.conf"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    StaticBiasConfig bias = static_bias_preset("fig2");
    EXPECT_THROW(apply_keys(bias, parse_key_values("colour = red\n")), ConfigError);
    EXPECT_THROW(apply_keys(bias, parse_key_values("runs = many\n")), ConfigError);
    ScenarioConfig track = track_preset("fig4");
    EXPECT_THROW(apply_keys(track, parse_key_values("heading = sideways\n")), ConfigError);
    EXPECT_THROW(apply_keys(track, parse_key_values("methods = ucm, magic\n")), ConfigError);
}

TEST(Config, SweepGridUnits) {
    StaticSweepConfig cfg = static_sweep_preset("fig3a");
    EXPECT_THROW(apply_keys(cfg, parse_key_values("sweep = alpha\ngrid = 10, 20\n")), ConfigError);
    cfg = static_sweep_preset("fig3a");
    EXPECT_THROW(apply_keys(cfg, parse_key_values("sweep = alpha\n")), ConfigError);
    cfg = static_sweep_preset("fig3a");
    EXPECT_THROW(apply_keys(cfg, parse_key_values("grid = 5000\ngrid_deg = 10\n")), ConfigError);
    cfg = static_sweep_preset("fig3a");
    apply_keys(cfg, parse_key_values("sweep = alpha\ngrid_deg = 30, 90\n"));
    ASSERT_EQ(cfg.grid.size(), 2u);
    EXPECT_NEAR(cfg.grid[1], deg_to_rad(90.0), 1e-15);
    EXPECT_THROW(apply_keys(cfg, parse_key_values("grid_deg = \n")), ConfigError);
}

TEST(Config, Presets) {
    EXPECT_EQ(presets_for(Subcommand::static_nees).size(), 4u);
    const auto d = static_sweep_preset("fig3d");
    EXPECT_EQ(d.swept, SweepParameter::sigma_alpha);
    EXPECT_EQ(d.noise.sigma_b, 30.0);
    EXPECT_NEAR(d.alpha, deg_to_rad(60.0), 1e-15);
    EXPECT_EQ(d.b, 8000.0);
    EXPECT_EQ(d.runs, 10000u);
    const auto t = track_preset("fig4");
    EXPECT_EQ(t.scans, 200u);
    EXPECT_EQ(t.runs, 1000u);
    EXPECT_THROW((void)track_preset("fig9"), ConfigError);
}

TEST(Config, ResolutionOrder) {
    TempDir dir("resolve");
    const auto conf = write_file(dir.path() / "t.conf", "runs = 40\nseed = 9\nscans = 12\n");
    ExperimentSpec spec;
    spec.subcommand = Subcommand::track;
    spec.config_path = conf;
    spec.runs = 7;
    const auto cfg = resolve_track(spec);
    EXPECT_EQ(cfg.runs, 7u);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.scans, 12u);

    ExperimentSpec full;
    full.subcommand = Subcommand::track;
    full.full_scale = true;
    EXPECT_EQ(resolve_track(full).runs, 5000u);
}

TEST(Config, StaticNeesWithoutPresetRunsAllSweeps) {
    ExperimentSpec spec;
    spec.subcommand = Subcommand::static_nees;
    const auto sweeps = resolve_static_nees(spec);
    ASSERT_EQ(sweeps.size(), 4u);
    EXPECT_EQ(sweeps[0].first, "b");
    EXPECT_EQ(sweeps[3].first, "sigma_alpha");
}

TEST(Commands, BoundsOutput) {
    std::ostringstream out;
    (void)cmd_bounds(10000, 2, 0.99, out);
    EXPECT_EQ(out.str(), "0.9744 1.0259\n");
}

TEST(Commands, StaticBiasWritesSummaryAndHistograms) {
    TempDir dir("bias");
    ExperimentSpec spec;
    spec.subcommand = Subcommand::static_bias;
    spec.runs = 200;
    spec.output_dir = dir.path();
    const auto files = cmd_static_bias(spec);
    const auto summary = lines_of(slurp(dir.path() / "bias_summary.csv"));
    const auto cfg = resolve_static_bias(spec);
    ASSERT_EQ(summary.size(), 1 + cfg.bearings.size() * 3);
    EXPECT_EQ(summary[0], "bearing_deg,method,mean_x,mean_y,truth_x,truth_y,se_x,se_y,n");
    EXPECT_EQ(files.size(), 1 + cfg.bearings.size());
    const auto hist = lines_of(slurp(dir.path() / "bias_hist_45.csv"));
    EXPECT_EQ(hist[0], "bin_center_x,bin_center_y,count");
    EXPECT_EQ(hist.size(), 1 + cfg.histogram_bins * cfg.histogram_bins);
}

TEST(Commands, StaticNeesWritesPerSweepFiles) {
    TempDir dir("nees");
    ExperimentSpec spec;
    spec.subcommand = Subcommand::static_nees;
    spec.preset = "fig3b";
    spec.runs = 100;
    spec.output_dir = dir.path();
    (void)cmd_static_nees(spec);
    const auto rows = lines_of(slurp(dir.path() / "nees_alpha.csv"));
    EXPECT_EQ(rows[0], "swept_value,method,nees,bound_low,bound_high,n");
    EXPECT_EQ(rows.size(), 1 + 19 * 3u);
    EXPECT_EQ(rows[1].rfind("0,conventional,", 0), 0u);
    EXPECT_EQ(rows.back().rfind("90,ducm,", 0), 0u);
}

TEST(Commands, TrackOutputsAreReproducibleAndContiguous) {
    TempDir dir("track");
    ExperimentSpec spec;
    spec.subcommand = Subcommand::track;
    spec.runs = 100;
    spec.output_dir = dir.path() / "a";
    (void)cmd_track(spec);
    spec.output_dir = dir.path() / "b";
    spec.threads = 3;
    (void)cmd_track(spec);
    for (const char* name : {"track_rmse.csv", "track_nees.csv"}) {
        EXPECT_EQ(slurp(dir.path() / "a" / name), slurp(dir.path() / "b" / name)) << name;
    }
    const auto rows = lines_of(slurp(dir.path() / "a" / "track_nees.csv"));
    EXPECT_EQ(rows[0], "scan,method,nees,bound_low,bound_high");
    ASSERT_EQ(rows.size(), 1 + 200 * 3u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto scan = std::stoul(rows[i].substr(0, rows[i].find(',')));
        ASSERT_EQ(scan, (i - 1) / 3 + 1);
    }
}

TEST(Commands, FailedRunLeavesNoPartialOutput) {
    TempDir dir("partial");
    {
        try {
            OutputSet out(dir.path());
            out.write("first.csv", "a\n");
            throw std::runtime_error("interrupted");
        } catch (const std::runtime_error&) {
        }
    }
    EXPECT_FALSE(fs::exists(dir.path() / "first.csv"));

    ExperimentSpec spec;
    spec.subcommand = Subcommand::track;
    spec.config_path = write_file(dir.path() / "bad.conf", "sigma_b = 0\n");
    spec.output_dir = dir.path() / "out";
    EXPECT_THROW((void)cmd_track(spec), ConfigError);
    EXPECT_FALSE(fs::exists(dir.path() / "out" / "track_rmse.csv"));
}
