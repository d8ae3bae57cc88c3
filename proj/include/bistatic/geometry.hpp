#pragma once

#include <stdexcept>
#include <string>

namespace bistatic {

/// Thrown when a point sits on a sensor or a bistatic range does not exceed the baseline.
class GeometryError : public std::domain_error {
public:
    explicit GeometryError(const std::string& what) : std::domain_error(what) {}
};

/// Planar bistatic layout: receiver at the origin, transmitter at [L, 0].
struct BistaticGeometry {
    double baseline = 0.0;

    /// Bistatic ranges at or below this value are rejected by the inverse transform.
    [[nodiscard]] double min_valid_range() const { return baseline * (1.0 + 1e-9); }
};

/// Validates baseline > 0 (and finite).
void validate(const BistaticGeometry& geom);

struct CartesianPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Range-sum b (meters) and receiver bearing alpha (radians, (-pi, pi]).
struct BistaticPoint {
    double b = 0.0;
    double alpha = 0.0;
};

/// First and second partials of the inverse map (x, y) = (f(b, alpha), g(b, alpha)).
/// The first-partial block is the conversion Jacobian [[df_db, df_dalpha], [dg_db, dg_dalpha]].
struct InversePartials {
    double df_db = 0.0;
    double df_dalpha = 0.0;
    double dg_db = 0.0;
    double dg_dalpha = 0.0;

    double d2f_db2 = 0.0;
    double d2f_dalpha2 = 0.0;
    double d2f_dbdalpha = 0.0;
    double d2g_db2 = 0.0;
    double d2g_dalpha2 = 0.0;
    double d2g_dbdalpha = 0.0;
};

/// Gradients of the forward map: phi = range sum, gamma = bearing.
struct ForwardPartials {
    double dphi_dx = 0.0;
    double dphi_dy = 0.0;
    double dgamma_dx = 0.0;
    double dgamma_dy = 0.0;
};

[[nodiscard]] BistaticPoint to_measurement(const CartesianPoint& p, const BistaticGeometry& geom);
[[nodiscard]] CartesianPoint to_cartesian(const BistaticPoint& z, const BistaticGeometry& geom);
[[nodiscard]] InversePartials inverse_partials(const BistaticPoint& z, const BistaticGeometry& geom);
[[nodiscard]] ForwardPartials forward_partials(const CartesianPoint& p, const BistaticGeometry& geom);

/// Wraps an angle into (-pi, pi].
[[nodiscard]] double wrap_angle(double radians);

[[nodiscard]] constexpr double deg_to_rad(double deg) { return deg * 0.017453292519943295; }
[[nodiscard]] constexpr double rad_to_deg(double rad) { return rad * 57.29577951308232; }

}  // namespace bistatic
