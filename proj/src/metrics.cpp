#include "bistatic/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <fmt/format.h>

namespace bistatic {

template <int N>
double normalized_error_squared(const Eigen::Matrix<double, N, 1>& error,
                                const Eigen::Matrix<double, N, N>& covariance) {
    const Eigen::LLT<Eigen::Matrix<double, N, N>> llt(covariance);
    if (llt.info() != Eigen::Success) {
        throw SingularCovarianceError("covariance is not positive definite");
    }
    const Eigen::Matrix<double, N, 1> whitened = llt.matrixL().solve(error);
    return whitened.squaredNorm();
}

template double normalized_error_squared<2>(const Eigen::Vector2d&, const Eigen::Matrix2d&);
template double normalized_error_squared<4>(const Eigen::Vector4d&, const Eigen::Matrix4d&);

namespace {

template <int N>
double mean_nees(std::span<const Eigen::Matrix<double, N, 1>> errors,
                 std::span<const Eigen::Matrix<double, N, N>> covariances) {
    if (errors.size() != covariances.size()) {
        throw std::invalid_argument("nees: error and covariance counts differ");
    }
    if (errors.empty()) {
        throw std::invalid_argument("nees: no samples");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        sum += normalized_error_squared<N>(errors[i], covariances[i]);
    }
    return sum / (static_cast<double>(errors.size()) * N);
}

}  // namespace

double nees_static(std::span<const Eigen::Vector2d> errors, std::span<const Eigen::Matrix2d> covariances) {
    return mean_nees<2>(errors, covariances);
}

double nees_dynamic(std::span<const Eigen::Vector4d> errors, std::span<const Eigen::Matrix4d> covariances) {
    return mean_nees<4>(errors, covariances);
}

// Acklam's rational approximation followed by one Halley step against erfc.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument(fmt::format("normal_quantile: p must be in (0, 1), got {}", p));
    }
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                             6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                             3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x = 0.0;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        // Upper tail by symmetry; 1 - p is exact here and avoids cancellation in the refinement.
        return -normal_quantile(1.0 - p);
    }

    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

ChiSquareBounds chi2_mean_bounds(std::size_t runs, std::size_t dof, double confidence) {
    if (runs == 0 || dof == 0) {
        throw std::invalid_argument("chi2_mean_bounds: runs and dof must be positive");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument(fmt::format("chi2_mean_bounds: confidence must be in (0, 1), got {}", confidence));
    }
    const double k = static_cast<double>(runs) * static_cast<double>(dof);
    const double v = 2.0 / (9.0 * k);
    const auto scaled_quantile = [&](double p) {
        const double base = 1.0 - v + normal_quantile(p) * std::sqrt(v);
        return std::max(0.0, base * base * base);
    };
    return {scaled_quantile(0.5 * (1.0 - confidence)), scaled_quantile(0.5 * (1.0 + confidence))};
}

Eigen::Vector2d MomentAccumulator2::mean() const {
    if (count == 0) {
        return Eigen::Vector2d::Zero();
    }
    return sum / static_cast<double>(count);
}

Eigen::Vector2d MomentAccumulator2::stddev() const {
    if (count < 2) {
        return Eigen::Vector2d::Zero();
    }
    const double n = static_cast<double>(count);
    const Eigen::Vector2d m = mean();
    const Eigen::Vector2d var = ((sum_sq - n * m.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
    return var.cwiseSqrt();
}

Eigen::Vector2d MomentAccumulator2::standard_error() const {
    if (count == 0) {
        return Eigen::Vector2d::Zero();
    }
    return stddev() / std::sqrt(static_cast<double>(count));
}

void ScanAccumulator::add(std::size_t scan_index, const StateVector& truth, const TrackState& estimate) {
    const StateVector err = truth - estimate.state;
    pos_sq[scan_index].add(err(0) * err(0) + err(2) * err(2));
    vel_sq[scan_index].add(err(1) * err(1) + err(3) * err(3));
    nees[scan_index].add(normalized_error_squared<4>(err, estimate.covariance) / 4.0);
}

ScanAccumulator& ScanAccumulator::operator+=(const ScanAccumulator& other) {
    if (other.pos_sq.size() != pos_sq.size()) {
        throw std::invalid_argument("ScanAccumulator: scan counts differ");
    }
    for (std::size_t i = 0; i < pos_sq.size(); ++i) {
        pos_sq[i] += other.pos_sq[i];
        vel_sq[i] += other.vel_sq[i];
        nees[i] += other.nees[i];
    }
    return *this;
}

Histogram2d::Histogram2d(double x_lo, double x_hi, double y_lo, double y_hi, std::size_t n_bins)
    : x_min(x_lo), x_max(x_hi), y_min(y_lo), y_max(y_hi), bins(n_bins), counts(n_bins * n_bins, 0) {
    if (n_bins == 0 || !(x_hi > x_lo) || !(y_hi > y_lo)) {
        throw std::invalid_argument("Histogram2d: empty range or zero bins");
    }
}

void Histogram2d::add(double x, double y) {
    if (x < x_min || x > x_max || y < y_min || y > y_max) {
        return;
    }
    const auto index = [this](double v, double lo, double hi) {
        const auto i = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        return std::min(i, bins - 1);
    };
    ++counts[index(x, x_min, x_max) * bins + index(y, y_min, y_max)];
}

double Histogram2d::x_center(std::size_t i) const {
    return x_min + (static_cast<double>(i) + 0.5) * (x_max - x_min) / static_cast<double>(bins);
}

double Histogram2d::y_center(std::size_t j) const {
    return y_min + (static_cast<double>(j) + 0.5) * (y_max - y_min) / static_cast<double>(bins);
}

bool BiasEstimate::within(double k) const {
    return std::abs(mean(0) - truth.x) <= k * standard_error(0) && std::abs(mean(1) - truth.y) <= k * standard_error(1);
}

}  // namespace bistatic
