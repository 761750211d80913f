#pragma once

#include <vector>

#include "drnav/forecast.hpp"

namespace drnav {

struct MomentStep {
    Vec2 mu = Vec2::Zero();
    Mat2 sigma = Mat2::Zero();
};

// Per-pedestrian, per-control-step mean and covariance of the forecast
// distribution; steps[k-1] covers control step k (step 0, the observed
// position, carries no constraint).
struct MomentField {
    int ped_id = -1;
    std::vector<MomentStep> steps;  // length K
};

// Interpaths: M sample paths resampled onto the controller grid.
struct InterpolatedPaths {
    int num_samples = 0;  // M
    int num_steps = 0;    // K
    std::vector<Vec2> data;

    const Vec2& at(int m, int k) const { return data[static_cast<std::size_t>(m) * num_steps + k]; }
    Vec2& at(int m, int k) { return data[static_cast<std::size_t>(m) * num_steps + k]; }
};

// Linearly interpolates every sample path onto {t_start + dt, ..., t_start +
// K*dt}. The ensemble origin anchors the path at t0. Throws when the window
// [t_start + dt, t_start + K*dt] leaves [t0, t0 + H*dt_forecast], naming the
// required H.
InterpolatedPaths interpolate_ensemble_at(const ForecastEnsemble& ensemble, double t_start,
                                          double dt, int K);

// Spec'd entry point: window starts at the ensemble's own t0.
inline InterpolatedPaths interpolate_ensemble(const ForecastEnsemble& ensemble, double dt, int K) {
    return interpolate_ensemble_at(ensemble, ensemble.t0, dt, K);
}

// Population (divide-by-M) mean/covariance per step, then delta_reg * I added
// to every covariance. Covariances are symmetric by construction.
std::vector<MomentStep> estimate_moments(const InterpolatedPaths& paths, double delta_reg);

// Convenience: interpolate then estimate for one pedestrian.
MomentField moment_field_at(const ForecastEnsemble& ensemble, double t_start, double dt, int K,
                            double delta_reg);

}  // namespace drnav
