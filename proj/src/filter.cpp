#include "bistatic/filter.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

namespace bistatic {

namespace {

constexpr double kInitialVariance = 100.0;

Eigen::Matrix<double, 2, 4> position_selector() {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return h;
}

}  // namespace

Eigen::Matrix2d TrackState::position_covariance() const {
    Eigen::Matrix2d p;
    p << covariance(0, 0), covariance(0, 2), covariance(2, 0), covariance(2, 2);
    return p;
}

MotionModel dcwna_model(double period, double accel_var) {
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw std::invalid_argument(fmt::format("sampling period must be positive, got {}", period));
    }
    if (!(accel_var >= 0.0)) {
        throw std::invalid_argument("acceleration variance must be >= 0");
    }
    const double t = period;
    Eigen::Matrix2d f_axis;
    f_axis << 1.0, t, 0.0, 1.0;
    const Eigen::Vector2d gain(0.5 * t * t, t);
    const Eigen::Matrix2d q_axis = accel_var * gain * gain.transpose();

    MotionModel model;
    model.period = t;
    model.transition.setZero();
    model.transition.block<2, 2>(0, 0) = f_axis;
    model.transition.block<2, 2>(2, 2) = f_axis;
    model.process_noise.setZero();
    model.process_noise.block<2, 2>(0, 0) = q_axis;
    model.process_noise.block<2, 2>(2, 2) = q_axis;
    return model;
}

TrackState initialize(const ConvertedMeasurement& first) {
    TrackState track;
    track.state << first.position.x, 0.0, first.position.y, 0.0;
    track.covariance = StateMatrix::Identity() * kInitialVariance;
    return track;
}

TrackState predict(const TrackState& track, const MotionModel& model) {
    const auto& f = model.transition;
    TrackState out;
    out.state = f * track.state;
    out.covariance = f * track.covariance * f.transpose() + model.process_noise;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

MeasurementSpacePrediction track_to_measurement_space(const TrackState& track, const BistaticGeometry& geom) {
    const auto p = track.position();
    const auto z = to_measurement(p, geom);
    if (z.b <= geom.min_valid_range()) {
        throw GeometryError(fmt::format("predicted position ({}, {}) lies on the baseline", p.x, p.y));
    }
    const auto d = forward_partials(p, geom);
    const Eigen::Matrix2d pos_cov = track.position_covariance();
    const Eigen::RowVector2d grad_b(d.dphi_dx, d.dphi_dy);
    const Eigen::RowVector2d grad_a(d.dgamma_dx, d.dgamma_dy);
    return {
        z.b,
        z.alpha,
        std::max(0.0, (grad_b * pos_cov * grad_b.transpose())(0, 0)),
        std::max(0.0, (grad_a * pos_cov * grad_a.transpose())(0, 0)),
    };
}

TrackState update(const TrackState& track, const ConvertedMeasurement& cm) {
    const auto h = position_selector();
    const Eigen::Vector2d measured(cm.position.x, cm.position.y);
    const Eigen::Vector2d innovation = measured - h * track.state;
    const Eigen::Matrix2d s = h * track.covariance * h.transpose() + cm.covariance;

    const Eigen::LDLT<Eigen::Matrix2d> solver(s);
    if (solver.info() != Eigen::Success || !solver.isPositive() || std::abs(s.determinant()) <= 0.0) {
        throw SingularInnovationError("innovation covariance is not invertible");
    }
    // K = P H^T S^-1
    const Eigen::Matrix<double, 4, 2> gain = solver.solve(h * track.covariance).transpose();

    TrackState out;
    out.state = track.state + gain * innovation;
    const StateMatrix i_kh = StateMatrix::Identity() - gain * h;
    out.covariance = i_kh * track.covariance * i_kh.transpose() + gain * cm.covariance * gain.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

ConvertedMeasurement convert_for_track(const TrackState& predicted, const NoisyMeasurement& raw, Method method,
                                       const BistaticGeometry& geom, EventCounts* events) {
    ConvertedMeasurement cm;
    switch (method) {
        case Method::conventional:
            cm = convert_conventional(raw, geom);
            break;
        case Method::ucm:
            cm = convert_ucm(raw, geom);
            break;
        case Method::ducm: {
            MeasurementSpacePrediction pred{raw.b_m, raw.alpha_m, 0.0, 0.0};
            try {
                pred = track_to_measurement_space(predicted, geom);
            } catch (const GeometryError&) {
                if (events != nullptr) {
                    ++events->ducm_fallbacks;
                }
            }
            cm = convert_ducm(raw, pred, geom);
            break;
        }
    }
    if (cm.psd_repaired && events != nullptr) {
        ++events->psd_repairs;
    }
    return cm;
}

TrackState step(const TrackState& track, const NoisyMeasurement& raw, Method method, const MotionModel& model,
                const BistaticGeometry& geom, EventCounts* events) {
    const TrackState predicted = predict(track, model);
    return update(predicted, convert_for_track(predicted, raw, method, geom, events));
}

}  // namespace bistatic
