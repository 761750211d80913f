#include "drnav/safeset.hpp"

#include <cmath>
#include <stdexcept>

namespace drnav {

SafeEllipsoid build_safe_ellipsoid(const Vec2& mu, const Vec2& robot_pos, double r, double d_min) {
    if (!(r > 0.0)) throw std::runtime_error("robot radius must be positive");
    if (!(d_min > r)) throw std::runtime_error("d_min must exceed the robot radius");
    if (!mu.allFinite() || !robot_pos.allFinite())
        throw std::runtime_error("non-finite safe-ellipsoid inputs");

    SafeEllipsoid ell;
    ell.mu = mu;
    ell.e = -1.0;

    const Vec2 diff = robot_pos - mu;
    const double d = diff.norm();
    if (d < d_min) {
        ell.feasible = false;  // mean inside the inflated disc; no valid ellipse
        return ell;
    }

    const Vec2 u = diff / d;            // minor axis, toward the robot
    const Vec2 u_perp(-u.y(), u.x());
    const double a = d - r;
    const double b = std::sqrt(d * d - r * r);

    // E = R diag(1/a^2, 1/b^2) R^T with R = [u | u_perp]; assembled entrywise
    // so E is symmetric exactly.
    const double ia2 = 1.0 / (a * a);
    const double ib2 = 1.0 / (b * b);
    const double exx = ia2 * u.x() * u.x() + ib2 * u_perp.x() * u_perp.x();
    const double eyy = ia2 * u.y() * u.y() + ib2 * u_perp.y() * u_perp.y();
    const double exy = ia2 * u.x() * u.y() + ib2 * u_perp.x() * u_perp.y();
    ell.E << exx, exy, exy, eyy;
    ell.feasible = true;
    return ell;
}

}  // namespace drnav
