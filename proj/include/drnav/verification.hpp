#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drnav/rng.hpp"

namespace drnav {

struct VerifyOptions {
    std::uint64_t seed = 20240817;
    int num_configs = 200;           // random (mu, Sigma, robot, r, eps) draws
    int samples_per_config = 100000;
    int tangency_geometries = 10000;
    // Scales Sigma inside the closed-form bound only. 1.0 is the real bound;
    // 0.5 reproduces a deliberately broken bound that the domination check
    // must catch.
    double sigma_scale_hook = 1.0;
};

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Moment-matched distribution families used to stress the closed-form bound.
enum class Family { Gaussian, TwoPointAxes, UniformEllipse, HeavyTailT5 };

const char* family_name(Family family);

// Checks, per family, that the closed-form worst-case CVaR dominates the
// empirical CVaR (within 3 standard errors), that empirical CVaR >= VaR, and
// that bound <= 0 implies an empirical violation probability <= eps plus
// binomial slack. Appends one result per property per family.
std::vector<PropertyResult> run_risk_verification(const VerifyOptions& options);

// Independent tangency oracle: reconstructs each ellipse boundary from an
// eigendecomposition of E and minimizes the distance to the robot center by
// scan plus golden-section refinement. The minimum must equal r to within
// 1e-6 * r and no boundary or interior sample may fall inside the disc.
std::vector<PropertyResult> run_tangency_verification(std::uint64_t seed, int geometries);

// Exact monotonicity checks of the bound in epsilon and in Sigma.
std::vector<PropertyResult> run_monotonicity_verification(std::uint64_t seed);

}  // namespace drnav
