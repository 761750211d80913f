#pragma once

#include <Eigen/Core>

namespace drnav {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Quadratic safety loss l(x) = (x - mu)^T E (x - mu) + e for one pedestrian
// at one step. The zero sublevel set is an ellipse centered on the predicted
// mean whose minor axis points at the robot and is tangent to the robot disc.
// feasible = false marks geometry where the mean is already inside the
// inflated disc and no such ellipse exists.
struct SafeEllipsoid {
    Vec2 mu = Vec2::Zero();
    Mat2 E = Mat2::Zero();
    double e = -1.0;
    bool feasible = false;

    double loss(const Vec2& x) const {
        Vec2 d = x - mu;
        return d.dot(E * d) + e;
    }
};

// Builds the free-set ellipse for a pedestrian mean against a robot disc of
// radius r. With d = |mu - robot_pos|: semi-axis toward the robot a = d - r
// (tangent to the disc), perpendicular semi-axis b = sqrt(d^2 - r^2) (the
// tangent length from mu to the disc). d < d_min yields feasible = false.
SafeEllipsoid build_safe_ellipsoid(const Vec2& mu, const Vec2& robot_pos, double r, double d_min);

}  // namespace drnav
