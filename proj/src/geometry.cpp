#include "bistatic/geometry.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace bistatic {

namespace {

void require_valid_range(const BistaticPoint& z, const BistaticGeometry& geom) {
    validate(geom);
    if (!std::isfinite(z.b) || !std::isfinite(z.alpha)) {
        throw GeometryError("bistatic point is not finite");
    }
    if (z.b <= geom.min_valid_range()) {
        throw GeometryError(
            fmt::format("bistatic range {} does not exceed baseline {}", z.b, geom.baseline));
    }
}

struct SensorRanges {
    double to_receiver;
    double to_transmitter;
};

SensorRanges ranges_or_throw(const CartesianPoint& p, const BistaticGeometry& geom) {
    validate(geom);
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw GeometryError("cartesian point is not finite");
    }
    const SensorRanges r{std::hypot(p.x, p.y), std::hypot(p.x - geom.baseline, p.y)};
    if (r.to_receiver == 0.0 || r.to_transmitter == 0.0) {
        throw GeometryError(fmt::format("point ({}, {}) coincides with a sensor", p.x, p.y));
    }
    return r;
}

}  // namespace

void validate(const BistaticGeometry& geom) {
    if (!(geom.baseline > 0.0) || !std::isfinite(geom.baseline)) {
        throw GeometryError(fmt::format("baseline must be positive, got {}", geom.baseline));
    }
}

double wrap_angle(double radians) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::remainder(radians, two_pi);
    if (wrapped <= -std::numbers::pi) {
        wrapped += two_pi;
    }
    return wrapped;
}

BistaticPoint to_measurement(const CartesianPoint& p, const BistaticGeometry& geom) {
    const auto r = ranges_or_throw(p, geom);
    return {r.to_receiver + r.to_transmitter, std::atan2(p.y, p.x)};
}

CartesianPoint to_cartesian(const BistaticPoint& z, const BistaticGeometry& geom) {
    require_valid_range(z, geom);
    const double L = geom.baseline;
    const double c = std::cos(z.alpha);
    const double s = std::sin(z.alpha);
    // Receiver range r1 = (b^2 - L^2) / (2 (b - L cos a)); same as the (L^2 - b^2) / (2 (L cos a - b)) form.
    const double r1 = (z.b * z.b - L * L) / (2.0 * (z.b - L * c));
    return {r1 * c, r1 * s};
}

// Everything is expressed through the receiver range r(b, a) with u = b - L cos a > 0:
//   r_b = (b - r) / u,          r_a = -r L sin a / u,
//   r_bb = (1 - 2 r_b) / u,     r_ba = -(r_a + r_b L sin a) / u,
//   r_aa = 2 r L^2 sin^2 a / u^2 - r L cos a / u,
// and f = r cos a, g = r sin a.
InversePartials inverse_partials(const BistaticPoint& z, const BistaticGeometry& geom) {
    require_valid_range(z, geom);
    const double L = geom.baseline;
    const double b = z.b;
    const double c = std::cos(z.alpha);
    const double s = std::sin(z.alpha);
    const double u = b - L * c;
    const double r = (b * b - L * L) / (2.0 * u);

    const double r_b = (b - r) / u;
    const double r_a = -r * L * s / u;
    const double r_bb = (1.0 - 2.0 * r_b) / u;
    const double r_ba = -(r_a + r_b * L * s) / u;
    const double r_aa = 2.0 * r * L * L * s * s / (u * u) - r * L * c / u;

    InversePartials d;
    d.df_db = r_b * c;
    d.df_dalpha = r_a * c - r * s;
    d.dg_db = r_b * s;
    d.dg_dalpha = r_a * s + r * c;

    d.d2f_db2 = r_bb * c;
    d.d2f_dbdalpha = r_ba * c - r_b * s;
    d.d2f_dalpha2 = r_aa * c - 2.0 * r_a * s - r * c;
    d.d2g_db2 = r_bb * s;
    d.d2g_dbdalpha = r_ba * s + r_b * c;
    d.d2g_dalpha2 = r_aa * s + 2.0 * r_a * c - r * s;
    return d;
}

ForwardPartials forward_partials(const CartesianPoint& p, const BistaticGeometry& geom) {
    const auto r = ranges_or_throw(p, geom);
    const double rho2 = p.x * p.x + p.y * p.y;
    return {
        p.x / r.to_receiver + (p.x - geom.baseline) / r.to_transmitter,
        p.y / r.to_receiver + p.y / r.to_transmitter,
        -p.y / rho2,
        p.x / rho2,
    };
}

}  // namespace bistatic
