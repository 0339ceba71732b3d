#pragma once

#include <cmath>

#include "fodest/common.hpp"

namespace fod {

/// Unit vector on S^2. All angular comparisons are axial: d and -d name the
/// same orientation.
struct Direction {
    double x = 0.0, y = 0.0, z = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    Direction normalized() const {
        const double n = norm();
        require(n > 0.0, "Direction: zero vector");
        return {x / n, y / n, z / n};
    }

    double dot(const Direction& o) const { return x * o.x + y * o.y + z * o.z; }

    Direction operator-() const { return {-x, -y, -z}; }

    Direction cross(const Direction& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
};

inline void check_unit(const Direction& d, double tol = 1e-9) {
    require(std::abs(d.norm() - 1.0) <= tol, "Direction: not unit-norm");
}

/// Acute angle between the axes spanned by u and v, in degrees, in [0, 90].
inline double acute_angle_deg(const Direction& u, const Direction& v) {
    double c = std::abs(u.dot(v));
    if (c > 1.0) c = 1.0;
    return std::acos(c) * 180.0 / kPi;
}

inline bool axially_equal(const Direction& u, const Direction& v, double tol = 1e-12) {
    const double c = std::abs(u.dot(v));
    return c >= 1.0 - tol;
}

} // namespace fod
