#pragma once

#include <memory>
#include <vector>

#include "drnav/rng.hpp"
#include "drnav/scenario.hpp"
#include "drnav/tracks.hpp"

namespace drnav {

// M sampled future trajectories for one pedestrian. samples(m, h) is the
// position of sample path m at time t0 + (h+1) * dt_forecast; origin is the
// observed position at t0 that anchors every path.
struct ForecastEnsemble {
    int ped_id = -1;
    double t0 = 0.0;
    double dt_forecast = 0.0;
    Vec2 origin = Vec2::Zero();
    int num_samples = 0;  // M
    int num_steps = 0;    // H
    std::vector<Vec2> data;  // M * H, row-major by sample

    const Vec2& at(int m, int h) const { return data[static_cast<std::size_t>(m) * num_steps + h]; }
    Vec2& at(int m, int h) { return data[static_cast<std::size_t>(m) * num_steps + h]; }
};

// Observed positions of one pedestrian, most recent last.
struct PedHistory {
    int ped_id = -1;
    std::vector<TrackSample> samples;
};

// Extrapolates the latest observed velocity; displacement noise accumulates
// as a random walk so path uncertainty grows with sqrt(h).
ForecastEnsemble forecast_constant_velocity(const PedHistory& history, double dt_forecast, int H,
                                            int M, double noise_std, Rng& rng);

// Each sample path draws a goal by weight and walks toward it at the
// pedestrian's historical speed, stopping on arrival, plus random-walk noise.
ForecastEnsemble forecast_goal_mixture(const PedHistory& history,
                                       const std::vector<WeightedGoal>& goals, double dt_forecast,
                                       int H, int M, double noise_std, Rng& rng);

// Ground-truth future from the recorded track (clamped at the ends) plus
// i.i.d. Gaussian noise per step; used for controlled experiments.
ForecastEnsemble forecast_replay_oracle(const PedestrianTrack& track, double t0,
                                        double dt_forecast, int H, int M, double noise_std,
                                        Rng& rng);

// Anything that turns an observed history into a Monte Carlo ensemble. A
// learned predictor slots in behind this interface without touching the
// controller.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual ForecastEnsemble forecast(const PedHistory& history, double t0, int H, int M,
                                      Rng& rng) const = 0;
};

class ConstantVelocityForecaster final : public Forecaster {
public:
    ConstantVelocityForecaster(double dt_forecast, double noise_std)
        : dt_forecast_(dt_forecast), noise_std_(noise_std) {}
    ForecastEnsemble forecast(const PedHistory& history, double t0, int H, int M,
                              Rng& rng) const override;

private:
    double dt_forecast_;
    double noise_std_;
};

class GoalMixtureForecaster final : public Forecaster {
public:
    GoalMixtureForecaster(std::vector<WeightedGoal> goals, double dt_forecast, double noise_std)
        : goals_(std::move(goals)), dt_forecast_(dt_forecast), noise_std_(noise_std) {}
    ForecastEnsemble forecast(const PedHistory& history, double t0, int H, int M,
                              Rng& rng) const override;

private:
    std::vector<WeightedGoal> goals_;
    double dt_forecast_;
    double noise_std_;
};

// Holds the ground-truth tracks; history is only used to pick the track.
class ReplayOracleForecaster final : public Forecaster {
public:
    ReplayOracleForecaster(const std::vector<PedestrianTrack>& tracks, double dt_forecast,
                           double noise_std);
    ForecastEnsemble forecast(const PedHistory& history, double t0, int H, int M,
                              Rng& rng) const override;

private:
    const std::vector<PedestrianTrack>* tracks_;
    double dt_forecast_;
    double noise_std_;
};

std::unique_ptr<Forecaster> make_forecaster(const ScenarioConfig& config,
                                            const std::vector<PedestrianTrack>& tracks);

}  // namespace drnav
