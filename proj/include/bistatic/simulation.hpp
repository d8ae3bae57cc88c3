#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "bistatic/conversion.hpp"
#include "bistatic/filter.hpp"
#include "bistatic/geometry.hpp"
#include "bistatic/metrics.hpp"

namespace bistatic {

/// Per-run random stream. Streams are derived from (campaign seed, stream tag, index), so
/// changing the run count never reshuffles earlier runs. Gaussians come from
/// std::normal_distribution; only determinism within one build is guaranteed.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

    double normal() { return normal_(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

enum class HeadingPolicy { random_uniform, fixed };

struct ScenarioConfig {
    BistaticGeometry geometry{4000.0};
    NoiseSpec noise{10.0, deg_to_rad(2.0)};
    double period = 1.0;
    std::size_t scans = 200;
    std::size_t runs = 1000;
    CartesianPoint initial_position{8000.0, 8000.0};
    double initial_speed = 10.0;
    HeadingPolicy heading_policy = HeadingPolicy::random_uniform;
    double fixed_heading = 0.0;  ///< radians, used when heading_policy == fixed
    bool truth_process_noise = true;
    double accel_var = kDefaultAccelVariance;
    std::vector<Method> methods{Method::conventional, Method::ucm, Method::ducm};
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

void validate(const ScenarioConfig& cfg);

struct StaticBiasConfig {
    BistaticGeometry geometry{4000.0};
    NoiseSpec noise{30.0, deg_to_rad(5.0)};
    double b = 8000.0;
    std::vector<double> bearings;  ///< radians
    std::size_t runs = 100000;
    std::size_t histogram_bins = 40;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

void validate(const StaticBiasConfig& cfg);

enum class SweepParameter { b, alpha, sigma_b, sigma_alpha };

struct StaticSweepConfig {
    BistaticGeometry geometry{4000.0};
    SweepParameter swept = SweepParameter::b;
    std::vector<double> grid;  ///< meters or radians, matching `swept`
    double b = 8000.0;
    double alpha = deg_to_rad(60.0);
    NoiseSpec noise{30.0, deg_to_rad(1.0)};
    /// Places the target on the baseline's perpendicular bisector, so alpha follows b.
    bool perpendicular_bisector = false;
    /// Prediction error covariance is sigma_b^2 * prediction_shape.
    Eigen::Matrix2d prediction_shape = (Eigen::Matrix2d() << 1.0, 0.1, 0.1, 1.0).finished();
    std::size_t runs = 10000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

void validate(const StaticSweepConfig& cfg);

/// Truth (b, alpha) for one grid point of a sweep.
[[nodiscard]] BistaticPoint sweep_truth(const StaticSweepConfig& cfg, double grid_value);
[[nodiscard]] NoiseSpec sweep_noise(const StaticSweepConfig& cfg, double grid_value);

/// Bearing of the point on the perpendicular bisector with range sum b.
[[nodiscard]] double bisector_bearing(double b, const BistaticGeometry& geom);

/// Truth states for scans 1..cfg.scans; element 0 is the initial state.
[[nodiscard]] std::vector<StateVector> generate_trajectory(const ScenarioConfig& cfg, Rng& rng);

[[nodiscard]] NoisyMeasurement generate_measurement(const CartesianPoint& truth, const NoiseSpec& noise,
                                                    const BistaticGeometry& geom, Rng& rng);

/// Symmetric square root factor S with S S^T = Q, valid for singular PSD Q.
[[nodiscard]] StateMatrix psd_sqrt(const StateMatrix& q);

[[nodiscard]] CampaignStatistics run_static_bias_campaign(const StaticBiasConfig& cfg);
[[nodiscard]] CampaignStatistics run_static_nees_campaign(const StaticSweepConfig& cfg);

/// Accumulated tracking results for a contiguous run range; merge with operator+=.
struct TrackingShard {
    std::size_t runs = 0;
    EventCounts events;
    std::uint64_t total_measurements = 0;
    std::vector<ScanAccumulator> per_method;
    std::vector<std::uint64_t> checksums;

    TrackingShard& operator+=(const TrackingShard& other);
};

[[nodiscard]] TrackingShard run_tracking_shard(const ScenarioConfig& cfg, std::size_t first_run, std::size_t last_run);
[[nodiscard]] CampaignStatistics summarize_tracking(const ScenarioConfig& cfg, const TrackingShard& shard);
[[nodiscard]] CampaignStatistics run_tracking_campaign(const ScenarioConfig& cfg);

}  // namespace bistatic
