#pragma once

#include <string_view>

#include <Eigen/Core>

#include "bistatic/geometry.hpp"

namespace bistatic {

/// Standard deviations of the independent zero-mean Gaussian measurement noises.
struct NoiseSpec {
    double sigma_b = 0.0;      ///< range-sum noise, meters
    double sigma_alpha = 0.0;  ///< bearing noise, radians
};

void validate(const NoiseSpec& noise);

struct NoisyMeasurement {
    double b_m = 0.0;
    double alpha_m = 0.0;
    NoiseSpec noise;

    [[nodiscard]] BistaticPoint point() const { return {b_m, alpha_m}; }
};

enum class Method { conventional, ucm, ducm };

[[nodiscard]] std::string_view to_string(Method method);
[[nodiscard]] Method method_from_string(std::string_view name);

inline constexpr Method kAllMethods[] = {Method::conventional, Method::ucm, Method::ducm};

struct ConvertedMeasurement {
    CartesianPoint position;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    Method method = Method::conventional;
    bool psd_repaired = false;  ///< diagonal jitter was added to restore positive semidefiniteness
};

/// Track prediction expressed in measurement coordinates, with the b/alpha cross term dropped.
struct MeasurementSpacePrediction {
    double b_t = 0.0;
    double alpha_t = 0.0;
    double var_bt = 0.0;
    double var_alphat = 0.0;

    [[nodiscard]] BistaticPoint point() const { return {b_t, alpha_t}; }
};

/// Symmetrizes in place; if the smallest eigenvalue is below -1e-12 * trace, raises the
/// diagonal so it reaches +1e-12 * trace. Returns true when jitter was added.
bool enforce_psd(Eigen::Matrix2d& covariance);

/// If b_m does not exceed the baseline, moves it to L * (1 + 1e-6). Returns true when clamped.
bool clamp_to_valid(NoisyMeasurement& m, const BistaticGeometry& geom);

/// Plain inverse transform with covariance J R J^T at the measurement.
[[nodiscard]] ConvertedMeasurement convert_conventional(const NoisyMeasurement& m,
                                                        const BistaticGeometry& geom);

/// Inverse transform minus the second-order bias term, both evaluated at the measurement.
[[nodiscard]] CartesianPoint ucm_position(const NoisyMeasurement& m, const BistaticGeometry& geom);

/// Second-order converted covariance evaluated at the measurement (symmetric, not PSD-enforced).
[[nodiscard]] Eigen::Matrix2d ucm_covariance(const NoisyMeasurement& m, const BistaticGeometry& geom);

/// Decorrelated covariance: second-order expansion about the prediction, including the
/// prediction-uncertainty cross terms. Evaluated at pred.point(); `noise` supplies the
/// measurement standard deviations. Symmetric, not PSD-enforced.
[[nodiscard]] Eigen::Matrix2d ducm_covariance(const MeasurementSpacePrediction& pred,
                                              const NoiseSpec& noise,
                                              const BistaticGeometry& geom);

[[nodiscard]] ConvertedMeasurement convert_ucm(const NoisyMeasurement& m, const BistaticGeometry& geom);

/// UCM position with the covariance taken from the prediction instead of the measurement.
[[nodiscard]] ConvertedMeasurement convert_ducm(const NoisyMeasurement& m,
                                                const MeasurementSpacePrediction& pred,
                                                const BistaticGeometry& geom);

}  // namespace bistatic
