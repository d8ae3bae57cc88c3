#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "bistatic/conversion.hpp"
#include "bistatic/geometry.hpp"

namespace bistatic {

using StateVector = Eigen::Vector4d;  // [x, vx, y, vy]
using StateMatrix = Eigen::Matrix4d;

class SingularInnovationError : public std::runtime_error {
public:
    explicit SingularInnovationError(const std::string& what) : std::runtime_error(what) {}
};

struct TrackState {
    StateVector state = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Zero();

    [[nodiscard]] CartesianPoint position() const { return {state(0), state(2)}; }
    [[nodiscard]] Eigen::Matrix2d position_covariance() const;
};

struct MotionModel {
    StateMatrix transition = StateMatrix::Identity();
    StateMatrix process_noise = StateMatrix::Zero();
    double period = 1.0;
};

/// Acceleration variance that reproduces the tracking scenario's process noise at T = 1 s.
inline constexpr double kDefaultAccelVariance = 0.25;

/// Constant-velocity model with process noise accel_var * G G^T, G = [T^2/2, T] per axis.
[[nodiscard]] MotionModel dcwna_model(double period, double accel_var = kDefaultAccelVariance);

/// Position from the converted measurement, zero velocity, covariance diag(100, 100, 100, 100).
[[nodiscard]] TrackState initialize(const ConvertedMeasurement& first);

[[nodiscard]] TrackState predict(const TrackState& track, const MotionModel& model);

/// Maps the predicted position and its covariance block into (b, alpha) by linearization.
[[nodiscard]] MeasurementSpacePrediction track_to_measurement_space(const TrackState& track,
                                                                    const BistaticGeometry& geom);

/// Position-only linear update, Joseph form.
[[nodiscard]] TrackState update(const TrackState& track, const ConvertedMeasurement& cm);

/// Counters for the recoverable events a campaign should surface.
struct EventCounts {
    std::uint64_t clamped_measurements = 0;
    std::uint64_t ducm_fallbacks = 0;
    std::uint64_t psd_repairs = 0;

    EventCounts& operator+=(const EventCounts& other) {
        clamped_measurements += other.clamped_measurements;
        ducm_fallbacks += other.ducm_fallbacks;
        psd_repairs += other.psd_repairs;
        return *this;
    }
    friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

/// Converts a raw measurement for a given method. For DUCM the covariance comes from the
/// a priori track; if that maps to an invalid bistatic point the raw measurement is used
/// instead and the fallback is counted.
[[nodiscard]] ConvertedMeasurement convert_for_track(const TrackState& predicted, const NoisyMeasurement& raw,
                                                     Method method, const BistaticGeometry& geom,
                                                     EventCounts* events = nullptr);

/// One scan: predict, convert, update.
[[nodiscard]] TrackState step(const TrackState& track, const NoisyMeasurement& raw, Method method,
                              const MotionModel& model, const BistaticGeometry& geom,
                              EventCounts* events = nullptr);

}  // namespace bistatic
