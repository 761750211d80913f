#include "drnav/forecast.hpp"

#include <cmath>
#include <stdexcept>

namespace drnav {

namespace {

void check_common(int H, int M, double noise_std, double dt_forecast) {
    if (H < 1) throw std::runtime_error("forecast horizon H must be >= 1");
    if (M < 2) throw std::runtime_error("forecast sample count M must be >= 2");
    if (noise_std < 0.0) throw std::runtime_error("noise_std must be >= 0");
    if (!(dt_forecast > 0.0)) throw std::runtime_error("dt_forecast must be positive");
}

ForecastEnsemble make_ensemble(int ped_id, double t0, double dt_forecast, const Vec2& origin,
                               int M, int H) {
    ForecastEnsemble ens;
    ens.ped_id = ped_id;
    ens.t0 = t0;
    ens.dt_forecast = dt_forecast;
    ens.origin = origin;
    ens.num_samples = M;
    ens.num_steps = H;
    ens.data.assign(static_cast<std::size_t>(M) * H, Vec2::Zero());
    return ens;
}

// Latest observed velocity from the last two history samples.
Vec2 history_velocity(const PedHistory& history) {
    if (history.samples.size() < 2)
        throw std::runtime_error("pedestrian " + std::to_string(history.ped_id) +
                                 ": history too short to estimate velocity (need >= 2 samples)");
    const TrackSample& last = history.samples.back();
    const TrackSample& prev = history.samples[history.samples.size() - 2];
    double dt = last.t - prev.t;
    if (!(dt > 0.0)) throw std::runtime_error("history times must be strictly increasing");
    return (last.p - prev.p) / dt;
}

}  // namespace

ForecastEnsemble forecast_constant_velocity(const PedHistory& history, double dt_forecast, int H,
                                            int M, double noise_std, Rng& rng) {
    check_common(H, M, noise_std, dt_forecast);
    Vec2 v = history_velocity(history);
    const Vec2 p0 = history.samples.back().p;
    double t0 = history.samples.back().t;

    ForecastEnsemble ens = make_ensemble(history.ped_id, t0, dt_forecast, p0, M, H);
    for (int m = 0; m < M; ++m) {
        Vec2 walk = Vec2::Zero();
        for (int h = 0; h < H; ++h) {
            if (noise_std > 0.0) walk += noise_std * gaussian2(rng);
            ens.at(m, h) = p0 + v * ((h + 1) * dt_forecast) + walk;
        }
    }
    return ens;
}

ForecastEnsemble forecast_goal_mixture(const PedHistory& history,
                                       const std::vector<WeightedGoal>& goals, double dt_forecast,
                                       int H, int M, double noise_std, Rng& rng) {
    check_common(H, M, noise_std, dt_forecast);
    if (goals.empty()) throw std::runtime_error("goal mixture needs at least one goal");
    double weight_sum = 0.0;
    for (const auto& g : goals) {
        if (!(g.weight > 0.0)) throw std::runtime_error("goal weights must be positive");
        weight_sum += g.weight;
    }

    double speed = history_velocity(history).norm();
    const Vec2 p0 = history.samples.back().p;
    double t0 = history.samples.back().t;

    ForecastEnsemble ens = make_ensemble(history.ped_id, t0, dt_forecast, p0, M, H);
    for (int m = 0; m < M; ++m) {
        // Categorical goal draw by weight.
        double pick = uniform01(rng) * weight_sum;
        std::size_t gi = 0;
        for (; gi + 1 < goals.size(); ++gi) {
            pick -= goals[gi].weight;
            if (pick < 0.0) break;
        }
        const Vec2 goal = goals[gi].goal;

        Vec2 core = p0;
        Vec2 walk = Vec2::Zero();
        for (int h = 0; h < H; ++h) {
            Vec2 to_goal = goal - core;
            double dist = to_goal.norm();
            double step = speed * dt_forecast;
            if (dist > 1e-12) core += (step >= dist) ? to_goal : Vec2(to_goal * (step / dist));
            if (noise_std > 0.0) walk += noise_std * gaussian2(rng);
            ens.at(m, h) = core + walk;
        }
    }
    return ens;
}

ForecastEnsemble forecast_replay_oracle(const PedestrianTrack& track, double t0, double dt_forecast,
                                        int H, int M, double noise_std, Rng& rng) {
    check_common(H, M, noise_std, dt_forecast);
    ForecastEnsemble ens =
        make_ensemble(track.ped_id, t0, dt_forecast, track.position_clamped(t0), M, H);
    for (int m = 0; m < M; ++m) {
        for (int h = 0; h < H; ++h) {
            Vec2 truth = track.position_clamped(t0 + (h + 1) * dt_forecast);
            Vec2 noise = noise_std > 0.0 ? Vec2(noise_std * gaussian2(rng)) : Vec2::Zero();
            ens.at(m, h) = truth + noise;
        }
    }
    return ens;
}

ForecastEnsemble ConstantVelocityForecaster::forecast(const PedHistory& history, double t0, int H,
                                                      int M, Rng& rng) const {
    (void)t0;  // anchored at the last observation
    return forecast_constant_velocity(history, dt_forecast_, H, M, noise_std_, rng);
}

ForecastEnsemble GoalMixtureForecaster::forecast(const PedHistory& history, double t0, int H,
                                                 int M, Rng& rng) const {
    (void)t0;
    return forecast_goal_mixture(history, goals_, dt_forecast_, H, M, noise_std_, rng);
}

ReplayOracleForecaster::ReplayOracleForecaster(const std::vector<PedestrianTrack>& tracks,
                                               double dt_forecast, double noise_std)
    : tracks_(&tracks), dt_forecast_(dt_forecast), noise_std_(noise_std) {}

ForecastEnsemble ReplayOracleForecaster::forecast(const PedHistory& history, double t0, int H,
                                                  int M, Rng& rng) const {
    for (const auto& track : *tracks_) {
        if (track.ped_id == history.ped_id)
            return forecast_replay_oracle(track, t0, dt_forecast_, H, M, noise_std_, rng);
    }
    throw std::runtime_error("replay oracle has no track for pedestrian " +
                             std::to_string(history.ped_id));
}

std::unique_ptr<Forecaster> make_forecaster(const ScenarioConfig& config,
                                            const std::vector<PedestrianTrack>& tracks) {
    switch (config.forecaster) {
        case ForecasterKind::ConstantVelocity:
            return std::make_unique<ConstantVelocityForecaster>(config.dt_forecast,
                                                                config.forecast_noise_std);
        case ForecasterKind::GoalMixture:
            return std::make_unique<GoalMixtureForecaster>(config.forecast_goals,
                                                           config.dt_forecast,
                                                           config.forecast_noise_std);
        case ForecasterKind::ReplayOracle:
            return std::make_unique<ReplayOracleForecaster>(tracks, config.dt_forecast,
                                                            config.forecast_noise_std);
    }
    throw std::runtime_error("unknown forecaster kind");
}

}  // namespace drnav
