#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "bistatic/filter.hpp"
#include "bistatic/metrics.hpp"
#include "oracles.hpp"

using namespace bistatic;

namespace {

const BistaticGeometry kGeom{4000.0};

double min_eigenvalue(const StateMatrix& m) {
    return Eigen::SelfAdjointEigenSolver<StateMatrix>(m).eigenvalues().minCoeff();
}

ConvertedMeasurement at(double x, double y, const Eigen::Matrix2d& r) {
    ConvertedMeasurement cm;
    cm.position = {x, y};
    cm.covariance = r;
    return cm;
}

}  // namespace

TEST(Filter, ProcessNoiseAtOneSecond) {
    const auto model = dcwna_model(1.0);
    StateMatrix expected;
    expected << 0.0625, 0.125, 0, 0,  //
        0.125, 0.25, 0, 0,            //
        0, 0, 0.0625, 0.125,          //
        0, 0, 0.125, 0.25;
    EXPECT_EQ(model.process_noise, expected);
    EXPECT_EQ(model.process_noise, model.process_noise.transpose());
    EXPECT_GE(min_eigenvalue(model.process_noise), -1e-15);
}

TEST(Filter, ConstantVelocityTransition) {
    const auto model = dcwna_model(1.0);
    EXPECT_EQ(model.transition * StateVector(0, 1, 0, 1), StateVector(1, 1, 1, 1));
    EXPECT_THROW((void)dcwna_model(0.0), std::invalid_argument);
    EXPECT_THROW((void)dcwna_model(-1.0), std::invalid_argument);
}

TEST(Filter, InitializeFromFirstMeasurement) {
    Eigen::Matrix2d r;
    r << 5000.0, 12.0, 12.0, 40.0;
    const auto track = initialize(at(8000.0, 8000.0, r));
    EXPECT_EQ(track.state, StateVector(8000, 0, 8000, 0));
    EXPECT_EQ(track.covariance, StateMatrix::Identity() * 100.0);
}

TEST(Filter, PredictExamples) {
    MotionModel noiseless = dcwna_model(1.0);
    noiseless.process_noise.setZero();
    TrackState t;
    t.state << 0, 1, 0, 1;
    EXPECT_EQ(predict(t, noiseless).state, StateVector(1, 1, 1, 1));

    const auto model = dcwna_model(1.0);
    TrackState zero_cov;
    EXPECT_EQ(predict(zero_cov, model).covariance, model.process_noise);
}

TEST(Filter, PredictGroupProperty) {
    MotionModel one = dcwna_model(1.5);
    MotionModel two = dcwna_model(3.0);
    one.process_noise.setZero();
    two.process_noise.setZero();
    TrackState t;
    t.state << 10, -2, 5, 0.5;
    t.covariance = StateMatrix::Identity() * 3.0;
    const auto a = predict(predict(t, one), one);
    const auto b = predict(t, two);
    EXPECT_LE((a.state - b.state).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((a.covariance - b.covariance).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Filter, MeasurementSpaceZeroCovariance) {
    TrackState t;
    t.state << 2000.0, 0.0, 3464.1016151377544, 0.0;
    const auto pred = track_to_measurement_space(t, kGeom);
    EXPECT_NEAR(pred.b_t, 8000.0, 1e-9);
    EXPECT_NEAR(pred.alpha_t, std::numbers::pi / 3, 1e-12);
    EXPECT_EQ(pred.var_bt, 0.0);
    EXPECT_EQ(pred.var_alphat, 0.0);
}

TEST(Filter, MeasurementSpaceVariancesMatchFiniteDifferenceGradients) {
    TrackState t;
    t.state << 2000.0, 3.0, 3464.1016, -1.0;
    t.covariance = StateMatrix::Identity() * 50.0;
    t.covariance(0, 0) = 900.0;
    t.covariance(2, 2) = 900.0;
    t.covariance(0, 2) = t.covariance(2, 0) = 90.0;

    const auto pred = track_to_measurement_space(t, kGeom);
    const auto g = oracle::forward_partials_fd({2000.0, 3464.1016}, kGeom);
    Eigen::Matrix2d p;
    p << 900.0, 90.0, 90.0, 900.0;
    const Eigen::RowVector2d gb(g.phix, g.phiy);
    const Eigen::RowVector2d ga(g.gamx, g.gamy);
    const double var_b = (gb * p * gb.transpose())(0, 0);
    const double var_a = (ga * p * ga.transpose())(0, 0);
    EXPECT_LE(std::abs(pred.var_bt - var_b) / var_b, 1e-6);
    EXPECT_LE(std::abs(pred.var_alphat - var_a) / var_a, 1e-6);
}

TEST(Filter, MeasurementSpaceRejectsBaselinePoints) {
    TrackState t;
    t.state << 2000.0, 0.0, 0.0, 0.0;
    EXPECT_THROW((void)track_to_measurement_space(t, kGeom), GeometryError);
    t.state << 0.0, 0.0, 0.0, 0.0;
    EXPECT_THROW((void)track_to_measurement_space(t, kGeom), GeometryError);
}

TEST(Filter, UpdateWithPerfectMeasurement) {
    TrackState t;
    t.state << 100, 1, 200, -1;
    t.covariance = StateMatrix::Identity() * 100.0;
    const auto post = update(t, at(110.0, 190.0, Eigen::Matrix2d::Identity() * 1e-12));
    EXPECT_NEAR(post.state(0), 110.0, 1e-9);
    EXPECT_NEAR(post.state(2), 190.0, 1e-9);
}

TEST(Filter, UpdateWithUninformativeMeasurement) {
    TrackState t;
    t.state << 100, 1, 200, -1;
    t.covariance = StateMatrix::Identity() * 100.0;
    const auto post = update(t, at(5000.0, -3000.0, Eigen::Matrix2d::Identity() * 1e12));
    EXPECT_LE((post.state - t.state).cwiseAbs().maxCoeff() / t.state.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((post.covariance - t.covariance).cwiseAbs().maxCoeff() / 100.0, 1e-6);
}

TEST(Filter, UpdateContractsCovariance) {
    TrackState t;
    t.state << 0, 0, 0, 0;
    t.covariance = StateMatrix::Identity() * 100.0;
    t.covariance(0, 1) = t.covariance(1, 0) = 20.0;
    Eigen::Matrix2d r;
    r << 400.0, 50.0, 50.0, 90.0;
    const auto post = update(t, at(3.0, 4.0, r));
    EXPECT_GE(min_eigenvalue(t.covariance - post.covariance), -1e-9);
}

TEST(Filter, UpdateRejectsSingularInnovation) {
    TrackState t;
    EXPECT_THROW((void)update(t, at(1.0, 1.0, Eigen::Matrix2d::Zero())), SingularInnovationError);
}

TEST(Filter, JosephUpdateStaysSymmetricPsd) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> scale(1.0, 1e4);
    const auto model = dcwna_model(1.0);
    TrackState t;
    t.covariance = StateMatrix::Identity() * 100.0;
    for (int i = 0; i < 10000; ++i) {
        t = predict(t, model);
        Eigen::Matrix2d a;
        a << normal(rng), normal(rng), normal(rng), normal(rng);
        const Eigen::Matrix2d r = scale(rng) * (a * a.transpose() + 0.1 * Eigen::Matrix2d::Identity());
        t = update(t, at(normal(rng), normal(rng), r));
        ASSERT_EQ(t.covariance, t.covariance.transpose());
        ASSERT_GE(min_eigenvalue(t.covariance), -1e-9 * t.covariance.trace());
    }
}

TEST(Filter, LinearGaussianConsistency) {
    // Identity conversion: true position plus Gaussian noise with the stated covariance.
    const auto model = dcwna_model(1.0);
    const StateMatrix q_factor = [&] {
        const Eigen::SelfAdjointEigenSolver<StateMatrix> eig(model.process_noise);
        return StateMatrix(eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
    }();
    Eigen::Matrix2d r;
    r << 400.0, 100.0, 100.0, 225.0;
    const Eigen::Matrix2d r_factor = Eigen::LLT<Eigen::Matrix2d>(r).matrixL();

    const int runs = 1000;
    const int scans = 30;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    double nees_sum = 0.0;
    for (int run = 0; run < runs; ++run) {
        StateVector truth(0.0, 5.0, 0.0, -3.0);
        TrackState track;
        track.state = truth + StateVector(10 * normal(rng), 10 * normal(rng), 10 * normal(rng), 10 * normal(rng));
        track.covariance = StateMatrix::Identity() * 100.0;
        for (int k = 0; k < scans; ++k) {
            truth = model.transition * truth +
                    q_factor * StateVector(normal(rng), normal(rng), normal(rng), normal(rng));
            const Eigen::Vector2d z =
                Eigen::Vector2d(truth(0), truth(2)) + r_factor * Eigen::Vector2d(normal(rng), normal(rng));
            track = update(predict(track, model), at(z(0), z(1), r));
        }
        nees_sum += normalized_error_squared<4>(StateVector(truth - track.state), track.covariance) / 4.0;
    }
    const double nees = nees_sum / runs;
    const auto bounds = chi2_mean_bounds(runs, 4, 0.99);
    EXPECT_GE(nees, bounds.low);
    EXPECT_LE(nees, bounds.high);
}

TEST(Filter, StepUcmEqualsManualComposition) {
    const auto model = dcwna_model(1.0);
    TrackState t;
    t.state << 2010.0, 3.0, 3450.0, -2.0;
    t.covariance = StateMatrix::Identity() * 100.0;
    const NoisyMeasurement m{8012.0, 1.05, NoiseSpec{10.0, deg_to_rad(2.0)}};
    const auto stepped = step(t, m, Method::ucm, model, kGeom);
    const auto predicted = predict(t, model);
    const auto manual = update(predicted, convert_ucm(m, kGeom));
    EXPECT_EQ(stepped.state, manual.state);
    EXPECT_EQ(stepped.covariance, manual.covariance);
}

TEST(Filter, StepDucmWithExactPredictionUsesUcmAtTruth) {
    // Zero track covariance and zero process noise: the prediction is the truth itself.
    MotionModel model = dcwna_model(1.0);
    model.process_noise.setZero();
    const BistaticPoint truth{8000.0, 1.0};
    const auto p = to_cartesian(truth, kGeom);
    TrackState t;
    t.state << p.x, 0.0, p.y, 0.0;
    const NoisyMeasurement m{8015.0, 1.01, NoiseSpec{10.0, deg_to_rad(2.0)}};

    const auto cm = convert_for_track(predict(t, model), m, Method::ducm, kGeom);
    const Eigen::Matrix2d expected = ucm_covariance({truth.b, truth.alpha, m.noise}, kGeom);
    EXPECT_LE((cm.covariance - expected).cwiseAbs().maxCoeff() / expected.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Filter, DucmCovarianceIgnoresCurrentMeasurement) {
    const auto model = dcwna_model(1.0);
    TrackState t;
    t.state << 2010.0, 3.0, 3450.0, -2.0;
    t.covariance = StateMatrix::Identity() * 100.0;
    const auto predicted = predict(t, model);
    const NoiseSpec noise{10.0, deg_to_rad(2.0)};
    const auto a = convert_for_track(predicted, {8012.0, 1.05, noise}, Method::ducm, kGeom);
    const auto b = convert_for_track(predicted, {7950.0, 0.98, noise}, Method::ducm, kGeom);
    EXPECT_EQ(a.covariance, b.covariance);
    EXPECT_NE(a.position.x, b.position.x);
}

TEST(Filter, DucmFallsBackWhenPredictionIsInvalid) {
    TrackState on_baseline;
    on_baseline.state << 2000.0, 0.0, 0.0, 0.0;
    const NoisyMeasurement m{8000.0, 1.0, NoiseSpec{10.0, 0.02}};
    EventCounts events;
    const auto cm = convert_for_track(on_baseline, m, Method::ducm, kGeom, &events);
    EXPECT_EQ(events.ducm_fallbacks, 1u);
    EXPECT_EQ(cm.covariance, ucm_covariance(m, kGeom));
}
