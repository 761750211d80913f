#pragma once

#include <utility>
#include <vector>

#include "drnav/safeset.hpp"

namespace drnav {

// Constraint value assigned when the free-set geometry is infeasible (mean
// inside the inflated robot disc). Large enough to dominate any feasible
// bound, finite so Risk Score ordering still ranks bad trajectories.
inline constexpr double kInfeasibleBound = 1e3;

// Per-horizon constraint summary for one rollout. per_step_g[k-1] is the
// worst-pedestrian bound at control step k; worst_ped_per_step holds the
// offending pedestrian id, -1 when no pedestrian is present.
struct RiskReport {
    std::vector<double> per_step_g;
    std::vector<int> worst_ped_per_step;
    bool feasible = false;
    double risk_score = 0.0;
};

// Worst-case CVaR of the safety loss over all distributions sharing the
// given mean and covariance: e + (1/epsilon) * Tr{sigma * E}. The mean is
// the ellipsoid center. Infeasible geometry maps to kInfeasibleBound.
double dr_cvar_bound(const SafeEllipsoid& ell, const Mat2& sigma, double epsilon);

// Max of dr_cvar_bound over pedestrians at one step. An empty pedestrian set
// is vacuously safe: g = -1 (the loss offset e), worst ped = -1.
std::pair<double, int> step_constraint(const std::vector<SafeEllipsoid>& ellipsoids,
                                       const std::vector<Mat2>& sigmas,
                                       const std::vector<int>& ped_ids, double epsilon);

// Discounted sum over the horizon: sum_{k=1..K} gamma^k * g_k.
double risk_score(const std::vector<double>& per_step_g, double gamma);

// Discrete tail estimators over raw loss samples: var is the
// ceil((1-eps)N)-th smallest sample, cvar the mean of the ceil(eps*N)
// largest. Test oracle for the approximation chain; never used by the
// controller.
std::pair<double, double> empirical_var_cvar(std::vector<double> loss_samples, double epsilon);

}  // namespace drnav
