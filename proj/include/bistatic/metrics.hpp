#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bistatic/conversion.hpp"
#include "bistatic/filter.hpp"

namespace bistatic {

class SingularCovarianceError : public std::runtime_error {
public:
    explicit SingularCovarianceError(const std::string& what) : std::runtime_error(what) {}
};

/// e^T R^-1 e for a single sample (not divided by the dimension).
template <int N>
[[nodiscard]] double normalized_error_squared(const Eigen::Matrix<double, N, 1>& error,
                                              const Eigen::Matrix<double, N, N>& covariance);

/// Mean of e^T R^-1 e / 2 over samples, each with its own covariance.
[[nodiscard]] double nees_static(std::span<const Eigen::Vector2d> errors,
                                 std::span<const Eigen::Matrix2d> covariances);

/// Mean of e^T P^-1 e / 4 over samples.
[[nodiscard]] double nees_dynamic(std::span<const Eigen::Vector4d> errors,
                                  std::span<const Eigen::Matrix4d> covariances);

/// sqrt(mean ||truth - estimate||^2).
template <int K>
[[nodiscard]] double rmse(std::span<const Eigen::Matrix<double, K, 1>> truths,
                          std::span<const Eigen::Matrix<double, K, 1>> estimates) {
    if (truths.size() != estimates.size()) {
        throw std::invalid_argument("rmse: truth and estimate counts differ");
    }
    if (truths.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        sum += (truths[i] - estimates[i]).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(truths.size()));
}

struct ChiSquareBounds {
    double low = 0.0;
    double high = 0.0;
};

/// Two-sided `confidence` interval for the mean of `runs` independent NEES samples of
/// dimension `dof`, i.e. quantiles of chi2(runs*dof) / (runs*dof). Uses the Wilson-Hilferty
/// cube-root normal approximation; the low bound is clamped at zero for tiny dof.
[[nodiscard]] ChiSquareBounds chi2_mean_bounds(std::size_t runs, std::size_t dof, double confidence);

/// Standard normal inverse CDF.
[[nodiscard]] double normal_quantile(double p);

/// Count, sum and sum of squares of 2-vectors; merges by addition.
struct MomentAccumulator2 {
    std::size_t count = 0;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    Eigen::Vector2d sum_sq = Eigen::Vector2d::Zero();

    void add(const Eigen::Vector2d& v) {
        ++count;
        sum += v;
        sum_sq += v.cwiseAbs2();
    }
    MomentAccumulator2& operator+=(const MomentAccumulator2& other) {
        count += other.count;
        sum += other.sum;
        sum_sq += other.sum_sq;
        return *this;
    }
    [[nodiscard]] Eigen::Vector2d mean() const;
    /// Sample standard deviation (n - 1 denominator); zero for n < 2.
    [[nodiscard]] Eigen::Vector2d stddev() const;
    [[nodiscard]] Eigen::Vector2d standard_error() const;
};

/// Running sum of a scalar; merges by addition.
struct ScalarAccumulator {
    std::size_t count = 0;
    double sum = 0.0;

    void add(double v) {
        ++count;
        sum += v;
    }
    ScalarAccumulator& operator+=(const ScalarAccumulator& other) {
        count += other.count;
        sum += other.sum;
        return *this;
    }
    [[nodiscard]] double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

/// Per-scan squared errors and NEES for one tracking method.
struct ScanAccumulator {
    std::vector<ScalarAccumulator> pos_sq;
    std::vector<ScalarAccumulator> vel_sq;
    std::vector<ScalarAccumulator> nees;

    explicit ScanAccumulator(std::size_t scans = 0) : pos_sq(scans), vel_sq(scans), nees(scans) {}

    void add(std::size_t scan_index, const StateVector& truth, const TrackState& estimate);
    ScanAccumulator& operator+=(const ScanAccumulator& other);
};

/// Regular 2D histogram over [x_min, x_max] x [y_min, y_max].
struct Histogram2d {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    std::size_t bins = 0;
    std::vector<std::size_t> counts;  ///< row-major, x index outer

    Histogram2d() = default;
    Histogram2d(double x_lo, double x_hi, double y_lo, double y_hi, std::size_t n_bins);

    void add(double x, double y);
    [[nodiscard]] double x_center(std::size_t i) const;
    [[nodiscard]] double y_center(std::size_t j) const;
    [[nodiscard]] std::size_t at(std::size_t i, std::size_t j) const { return counts[i * bins + j]; }
};

struct BiasEstimate {
    double bearing = 0.0;  ///< radians
    Method method = Method::conventional;
    CartesianPoint truth;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();  ///< mean converted position
    Eigen::Vector2d standard_error = Eigen::Vector2d::Zero();
    std::size_t n = 0;

    /// True when |mean - truth| <= k * SE on both axes.
    [[nodiscard]] bool within(double k) const;
};

struct StaticNeesPoint {
    double swept_value = 0.0;  ///< in the swept parameter's internal unit (m or rad)
    Method method = Method::conventional;
    double nees = 0.0;
    std::size_t n = 0;
};

struct ScanSeries {
    Method method = Method::conventional;
    std::vector<double> rmse_pos;
    std::vector<double> rmse_vel;
    std::vector<double> nees;
    std::uint64_t measurement_checksum = 0;  ///< fold of every raw measurement the filter consumed
};

struct HistogramRecord {
    double bearing = 0.0;
    Histogram2d histogram;
};

struct CampaignStatistics {
    std::size_t runs = 0;
    EventCounts events;
    std::uint64_t total_measurements = 0;
    ChiSquareBounds nees_bounds;

    std::vector<BiasEstimate> bias;
    std::vector<HistogramRecord> histograms;
    std::vector<StaticNeesPoint> static_nees;
    std::vector<ScanSeries> tracking;
};

}  // namespace bistatic
