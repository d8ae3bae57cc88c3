#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bistatic/experiment_config.hpp"
#include "bistatic/metrics.hpp"

namespace bistatic {

/// Files created through it are deleted on destruction unless commit() was called.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    ~OutputSet();
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    /// Writes `contents` to dir/name and records the path.
    void write(const std::string& name, const std::string& contents);
    void commit() { committed_ = true; }
    [[nodiscard]] const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
    bool committed_ = false;
};

// CSV renderers. Numbers use the shortest round-trip representation with a '.' decimal point.
[[nodiscard]] std::string bias_summary_csv(const CampaignStatistics& stats);
[[nodiscard]] std::string bias_histogram_csv(const Histogram2d& hist);
[[nodiscard]] std::string static_nees_csv(const StaticSweepConfig& cfg, const CampaignStatistics& stats);
[[nodiscard]] std::string track_rmse_csv(const CampaignStatistics& stats);
[[nodiscard]] std::string track_nees_csv(const CampaignStatistics& stats);

/// Writes bias_summary.csv and bias_hist_<bearing_deg>.csv. Returns the written paths.
std::vector<std::filesystem::path> cmd_static_bias(const ExperimentSpec& spec);
/// Writes nees_<sweep>.csv for each resolved sweep.
std::vector<std::filesystem::path> cmd_static_nees(const ExperimentSpec& spec);
/// Writes track_rmse.csv and track_nees.csv.
std::vector<std::filesystem::path> cmd_track(const ExperimentSpec& spec);
/// Prints "low high" to `out`.
ChiSquareBounds cmd_bounds(std::size_t runs, std::size_t dof, double confidence, std::ostream& out);

}  // namespace bistatic
