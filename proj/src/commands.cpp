#include "bistatic/commands.hpp"

#include <fstream>
#include <ostream>
#include <system_error>

#include <fmt/format.h>

namespace bistatic {

namespace fs = std::filesystem;

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
        throw std::runtime_error(fmt::format("cannot create output directory '{}'", dir_.string()));
    }
}

OutputSet::~OutputSet() {
    if (committed_) {
        return;
    }
    for (const auto& f : files_) {
        std::error_code ec;
        fs::remove(f, ec);
    }
}

void OutputSet::write(const std::string& name, const std::string& contents) {
    const fs::path path = dir_ / name;
    files_.push_back(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
    out.flush();
    if (!out) {
        throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
    }
}

std::string bias_summary_csv(const CampaignStatistics& stats) {
    std::string csv = "bearing_deg,method,mean_x,mean_y,truth_x,truth_y,se_x,se_y,n\n";
    for (const auto& e : stats.bias) {
        csv += fmt::format("{:g},{},{},{},{},{},{},{},{}\n", rad_to_deg(e.bearing), to_string(e.method), e.mean(0),
                           e.mean(1), e.truth.x, e.truth.y, e.standard_error(0), e.standard_error(1), e.n);
    }
    return csv;
}

std::string bias_histogram_csv(const Histogram2d& hist) {
    std::string csv = "bin_center_x,bin_center_y,count\n";
    for (std::size_t i = 0; i < hist.bins; ++i) {
        for (std::size_t j = 0; j < hist.bins; ++j) {
            csv += fmt::format("{},{},{}\n", hist.x_center(i), hist.y_center(j), hist.at(i, j));
        }
    }
    return csv;
}

std::string static_nees_csv(const StaticSweepConfig& cfg, const CampaignStatistics& stats) {
    const bool angular = cfg.swept == SweepParameter::alpha || cfg.swept == SweepParameter::sigma_alpha;
    std::string csv = "swept_value,method,nees,bound_low,bound_high,n\n";
    for (const auto& p : stats.static_nees) {
        const double shown = angular ? rad_to_deg(p.swept_value) : p.swept_value;
        csv += fmt::format("{:g},{},{},{},{},{}\n", shown, to_string(p.method), p.nees, stats.nees_bounds.low,
                           stats.nees_bounds.high, p.n);
    }
    return csv;
}

std::string track_rmse_csv(const CampaignStatistics& stats) {
    std::string csv = "scan,method,rmse_pos,rmse_vel\n";
    if (stats.tracking.empty()) {
        return csv;
    }
    for (std::size_t k = 0; k < stats.tracking.front().rmse_pos.size(); ++k) {
        for (const auto& s : stats.tracking) {
            csv += fmt::format("{},{},{},{}\n", k + 1, to_string(s.method), s.rmse_pos[k], s.rmse_vel[k]);
        }
    }
    return csv;
}

std::string track_nees_csv(const CampaignStatistics& stats) {
    std::string csv = "scan,method,nees,bound_low,bound_high\n";
    if (stats.tracking.empty()) {
        return csv;
    }
    for (std::size_t k = 0; k < stats.tracking.front().nees.size(); ++k) {
        for (const auto& s : stats.tracking) {
            csv += fmt::format("{},{},{},{},{}\n", k + 1, to_string(s.method), s.nees[k], stats.nees_bounds.low,
                               stats.nees_bounds.high);
        }
    }
    return csv;
}

std::vector<fs::path> cmd_static_bias(const ExperimentSpec& spec) {
    const StaticBiasConfig cfg = resolve_static_bias(spec);
    const CampaignStatistics stats = run_static_bias_campaign(cfg);

    OutputSet out(spec.output_dir);
    out.write("bias_summary.csv", bias_summary_csv(stats));
    for (const auto& h : stats.histograms) {
        out.write(fmt::format("bias_hist_{:g}.csv", rad_to_deg(h.bearing)), bias_histogram_csv(h.histogram));
    }
    out.commit();
    return out.files();
}

std::vector<fs::path> cmd_static_nees(const ExperimentSpec& spec) {
    const auto sweeps = resolve_static_nees(spec);
    OutputSet out(spec.output_dir);
    for (const auto& [name, cfg] : sweeps) {
        const CampaignStatistics stats = run_static_nees_campaign(cfg);
        out.write(fmt::format("nees_{}.csv", name), static_nees_csv(cfg, stats));
    }
    out.commit();
    return out.files();
}

std::vector<fs::path> cmd_track(const ExperimentSpec& spec) {
    const ScenarioConfig cfg = resolve_track(spec);
    const CampaignStatistics stats = run_tracking_campaign(cfg);

    OutputSet out(spec.output_dir);
    out.write("track_rmse.csv", track_rmse_csv(stats));
    out.write("track_nees.csv", track_nees_csv(stats));
    out.commit();
    return out.files();
}

ChiSquareBounds cmd_bounds(std::size_t runs, std::size_t dof, double confidence, std::ostream& out) {
    const ChiSquareBounds bounds = chi2_mean_bounds(runs, dof, confidence);
    out << fmt::format("{:.4f} {:.4f}\n", bounds.low, bounds.high);
    return bounds;
}

}  // namespace bistatic
