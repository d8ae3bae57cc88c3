#include "bistatic/conversion.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace bistatic {

namespace {

// Weights of the outer products v v^T that make up the second-order covariance, with
// v ranging over the first partials, the pure second partials and the mixed partial.
struct TermWeights {
    double first_b;
    double first_alpha;
    double second_bb;
    double second_aa;
    double second_ba;
};

TermWeights weights(const NoiseSpec& noise, double var_bt, double var_alphat) {
    const double vb = noise.sigma_b * noise.sigma_b;
    const double va = noise.sigma_alpha * noise.sigma_alpha;
    return {
        vb,
        va,
        0.5 * vb * vb + vb * var_bt,
        0.5 * va * va + va * var_alphat,
        vb * va + vb * var_alphat + va * var_bt,
    };
}

Eigen::Matrix2d assemble(const InversePartials& d, const TermWeights& w) {
    const auto entry = [&](double fb, double fa, double fbb, double faa, double fba,
                           double gb, double ga, double gbb, double gaa, double gba) {
        return w.first_b * fb * gb + w.first_alpha * fa * ga + w.second_bb * fbb * gbb +
               w.second_aa * faa * gaa + w.second_ba * fba * gba;
    };
    const double xx = entry(d.df_db, d.df_dalpha, d.d2f_db2, d.d2f_dalpha2, d.d2f_dbdalpha,
                            d.df_db, d.df_dalpha, d.d2f_db2, d.d2f_dalpha2, d.d2f_dbdalpha);
    const double yy = entry(d.dg_db, d.dg_dalpha, d.d2g_db2, d.d2g_dalpha2, d.d2g_dbdalpha,
                            d.dg_db, d.dg_dalpha, d.d2g_db2, d.d2g_dalpha2, d.d2g_dbdalpha);
    const double xy = entry(d.df_db, d.df_dalpha, d.d2f_db2, d.d2f_dalpha2, d.d2f_dbdalpha,
                            d.dg_db, d.dg_dalpha, d.d2g_db2, d.d2g_dalpha2, d.d2g_dbdalpha);
    Eigen::Matrix2d r;
    r << xx, xy, xy, yy;
    return r;
}

}  // namespace

void validate(const NoiseSpec& noise) {
    if (!(noise.sigma_b >= 0.0) || !(noise.sigma_alpha >= 0.0) || !std::isfinite(noise.sigma_b) ||
        !std::isfinite(noise.sigma_alpha)) {
        throw std::invalid_argument(fmt::format("noise standard deviations must be finite and >= 0, got ({}, {})",
                                                noise.sigma_b, noise.sigma_alpha));
    }
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::conventional: return "conventional";
        case Method::ucm: return "ucm";
        case Method::ducm: return "ducm";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    for (Method m : kAllMethods) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw std::invalid_argument(fmt::format("unknown conversion method '{}'", name));
}

bool enforce_psd(Eigen::Matrix2d& covariance) {
    covariance = 0.5 * (covariance + covariance.transpose()).eval();
    const double trace = covariance.trace();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(covariance, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    const double floor = 1e-12 * std::abs(trace);
    if (min_eig >= -floor) {
        return false;
    }
    covariance.diagonal().array() += floor - min_eig;
    return true;
}

bool clamp_to_valid(NoisyMeasurement& m, const BistaticGeometry& geom) {
    if (m.b_m > geom.min_valid_range()) {
        return false;
    }
    m.b_m = geom.baseline * (1.0 + 1e-6);
    return true;
}

ConvertedMeasurement convert_conventional(const NoisyMeasurement& m, const BistaticGeometry& geom) {
    validate(m.noise);
    const auto z = m.point();
    const auto d = inverse_partials(z, geom);
    Eigen::Matrix2d jacobian;
    jacobian << d.df_db, d.df_dalpha, d.dg_db, d.dg_dalpha;
    const Eigen::Vector2d variances(m.noise.sigma_b * m.noise.sigma_b,
                                    m.noise.sigma_alpha * m.noise.sigma_alpha);

    ConvertedMeasurement out;
    out.position = to_cartesian(z, geom);
    out.covariance = jacobian * variances.asDiagonal() * jacobian.transpose();
    out.method = Method::conventional;
    out.psd_repaired = enforce_psd(out.covariance);
    return out;
}

CartesianPoint ucm_position(const NoisyMeasurement& m, const BistaticGeometry& geom) {
    validate(m.noise);
    const auto z = m.point();
    const auto p = to_cartesian(z, geom);
    const auto d = inverse_partials(z, geom);
    const double vb = m.noise.sigma_b * m.noise.sigma_b;
    const double va = m.noise.sigma_alpha * m.noise.sigma_alpha;
    return {
        p.x - 0.5 * vb * d.d2f_db2 - 0.5 * va * d.d2f_dalpha2,
        p.y - 0.5 * vb * d.d2g_db2 - 0.5 * va * d.d2g_dalpha2,
    };
}

Eigen::Matrix2d ucm_covariance(const NoisyMeasurement& m, const BistaticGeometry& geom) {
    validate(m.noise);
    return assemble(inverse_partials(m.point(), geom), weights(m.noise, 0.0, 0.0));
}

Eigen::Matrix2d ducm_covariance(const MeasurementSpacePrediction& pred, const NoiseSpec& noise,
                                const BistaticGeometry& geom) {
    validate(noise);
    if (!(pred.var_bt >= 0.0) || !(pred.var_alphat >= 0.0)) {
        throw std::invalid_argument("prediction variances must be >= 0");
    }
    return assemble(inverse_partials(pred.point(), geom), weights(noise, pred.var_bt, pred.var_alphat));
}

ConvertedMeasurement convert_ucm(const NoisyMeasurement& m, const BistaticGeometry& geom) {
    ConvertedMeasurement out;
    out.position = ucm_position(m, geom);
    out.covariance = ucm_covariance(m, geom);
    out.method = Method::ucm;
    out.psd_repaired = enforce_psd(out.covariance);
    return out;
}

ConvertedMeasurement convert_ducm(const NoisyMeasurement& m, const MeasurementSpacePrediction& pred,
                                  const BistaticGeometry& geom) {
    ConvertedMeasurement out;
    out.position = ucm_position(m, geom);
    out.covariance = ducm_covariance(pred, m.noise, geom);
    out.method = Method::ducm;
    out.psd_repaired = enforce_psd(out.covariance);
    return out;
}

}  // namespace bistatic
