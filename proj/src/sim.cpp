#include "drnav/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include <json.hpp>

namespace drnav {

namespace {

using nlohmann::json;

constexpr std::uint64_t kCemStream = 0x43454d2d53545244ULL;
constexpr std::uint64_t kForecastStream = 0x464f524543415354ULL;

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

struct PedCache {
    ForecastEnsemble ensemble;
    bool valid = false;
};

}  // namespace

PedHistory observed_history(const PedestrianTrack& track, double t) {
    PedHistory history;
    history.ped_id = track.ped_id;
    for (const auto& s : track.samples) {
        if (s.t <= t + 1e-9) history.samples.push_back(s);
        else break;
    }
    if (history.samples.empty() || history.samples.back().t < t - 1e-9)
        history.samples.push_back({t, track.position_clamped(t)});
    return history;
}

EpisodeResult run_episode(const ScenarioConfig& scenario,
                          const std::vector<PedestrianTrack>& tracks,
                          const Forecaster& forecaster, const EpisodeOptions& options) {
    scenario.validate();

    const double dt = scenario.dt;
    const int K = scenario.horizon_K;
    const int ratio = scenario.steps_per_forecast();
    // Re-aligned moment windows between refreshes need up to ratio-1 extra
    // controller steps of coverage.
    const int forecast_H = static_cast<int>(
        std::ceil((K + ratio - 1) * dt / scenario.dt_forecast - 1e-9));

    PlannerConfig planner_cfg = PlannerConfig::from_scenario(scenario);
    planner_cfg.eval_threads = options.eval_threads;
    CemPlanner planner(planner_cfg);

    Rng cem_rng = derive_rng(scenario.rng_seed, kCemStream);

    double max_track_end = 0.0;
    for (const auto& track : tracks) max_track_end = std::max(max_track_end, track.end_time());

    EpisodeResult result;
    MetricsRecord& metrics = result.metrics;
    metrics.seed = scenario.rng_seed;
    metrics.epsilon = scenario.epsilon;

    Vec2 x = scenario.robot_start;
    double t = 0.0;
    int step_index = 0;
    bool in_collision_prev = false;
    double wall_time_total_ms = 0.0;
    int planned_steps = 0;

    for (const auto& [id, p] : pedestrians_at(tracks, 0.0)) {
        (void)id;
        if ((p - x).norm() < scenario.robot_radius) metrics.initial_state_collision = true;
    }

    std::map<int, PedCache> cache;

    while (true) {
        if (t >= scenario.episode_duration - 1e-9) break;
        if ((x - scenario.robot_goal).norm() < scenario.goal_tol) {
            metrics.reached_goal = true;
            break;
        }
        if (!tracks.empty() && t > max_track_end + 1e-9) break;

        auto peds = pedestrians_at(tracks, t);

        // State bookkeeping at time t, before the move.
        json rec;
        rec["t"] = t;
        rec["x"] = vec2_json(x);
        rec["epsilon"] = scenario.epsilon;
        json ped_list = json::array();
        bool in_collision = false;
        for (const auto& [id, p] : peds) {
            double dist = (p - x).norm();
            metrics.min_distance = std::min(metrics.min_distance, dist);
            if (dist < scenario.robot_radius) in_collision = true;
            ped_list.push_back({{"id", id}, {"p", vec2_json(p)}, {"dist", dist}});
        }
        rec["peds"] = std::move(ped_list);
        if (in_collision) {
            ++metrics.collision_steps;
            if (!in_collision_prev) ++metrics.collision_events;
        }
        in_collision_prev = in_collision;
        metrics.positional_cost += (x - scenario.robot_goal).squaredNorm() * dt;

        Vec2 u0 = Vec2::Zero();
        std::vector<std::string> warnings;
        if (!options.disable_control) {
            auto wall_start = std::chrono::steady_clock::now();

            // Forecast refresh: full refresh on every dt_forecast boundary,
            // plus first-sight forecasts for pedestrians that appeared since.
            bool boundary = (step_index % ratio == 0);
            if (boundary) cache.clear();
            for (const auto& track : tracks) {
                bool present = false;
                for (const auto& [id, p] : peds) {
                    if (id == track.ped_id) { present = true; break; }
                }
                if (!present) {
                    cache.erase(track.ped_id);
                    continue;
                }
                if (cache[track.ped_id].valid) continue;
                PedHistory history = observed_history(track, t);
                Rng ped_rng = derive_rng(scenario.rng_seed,
                                         kForecastStream ^ static_cast<std::uint64_t>(track.ped_id),
                                         static_cast<std::uint64_t>(step_index));
                try {
                    cache[track.ped_id].ensemble = forecaster.forecast(
                        history, t, forecast_H, scenario.forecast_samples, ped_rng);
                    cache[track.ped_id].valid = true;
                } catch (const std::exception& ex) {
                    cache.erase(track.ped_id);
                    warnings.push_back("forecast skipped for pedestrian " +
                                       std::to_string(track.ped_id) + ": " + ex.what());
                }
            }

            // Moment fields re-aligned to the current time.
            std::vector<MomentField> fields;
            json moments_json = json::array();
            for (const auto& [id, entry] : cache) {
                if (!entry.valid) continue;
                fields.push_back(
                    moment_field_at(entry.ensemble, t, dt, K, scenario.delta_reg));
                if (options.verbose_log) {
                    json steps = json::array();
                    for (const auto& s : fields.back().steps)
                        steps.push_back({s.mu.x(), s.mu.y(), s.sigma(0, 0), s.sigma(0, 1),
                                         s.sigma(1, 1)});
                    moments_json.push_back({{"id", id}, {"steps", std::move(steps)}});
                }
            }

            PlanResult plan = planner.plan(x, fields, cem_rng);
            u0 = plan.u0;

            auto wall_end = std::chrono::steady_clock::now();
            wall_time_total_ms +=
                std::chrono::duration<double, std::milli>(wall_end - wall_start).count();
            ++planned_steps;

            json iters = json::array();
            for (const auto& it : plan.iterations)
                iters.push_back({{"feasible_count", it.feasible_count},
                                 {"best_cost", it.best_cost},
                                 {"best_risk", it.best_risk_score},
                                 {"best_cost_so_far", it.best_feasible_cost_so_far}});
            rec["cem"] = std::move(iters);
            rec["feasible"] = plan.from_feasible;
            if (options.verbose_log) rec["moments"] = std::move(moments_json);
        } else {
            rec["cem"] = json::array();
            rec["feasible"] = nullptr;
        }

        rec["u"] = vec2_json(u0);
        if (!warnings.empty()) rec["warnings"] = warnings;
        result.trajectory_log += rec.dump();
        result.trajectory_log += '\n';

        x += u0 * dt;
        t = ++step_index * dt;
    }

    metrics.episode_length = t;
    metrics.collision_norm =
        t > 0.0 ? (metrics.collision_steps * dt) / (t / 10.0) : 0.0;
    metrics.success = metrics.reached_goal && metrics.collision_events == 0;
    metrics.mean_step_wall_time_ms = planned_steps > 0 ? wall_time_total_ms / planned_steps : 0.0;
    return result;
}

namespace {

MetricStats stats_over(const std::vector<double>& values) {
    MetricStats s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / values.size();
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / values.size());
    return s;
}

}  // namespace

Aggregate aggregate_metrics(const std::vector<MetricsRecord>& records) {
    Aggregate agg;
    agg.episodes_total = static_cast<int>(records.size());
    std::vector<double> collision, min_dist, cost, wall, length;
    int successes = 0;
    for (const auto& r : records) {
        if (r.failed) ++agg.episodes_failed;
        if (r.initial_state_collision) ++agg.initial_state_collisions;
        if (r.failed || r.initial_state_collision) continue;
        ++agg.episodes_included;
        successes += r.success ? 1 : 0;
        collision.push_back(r.collision_norm);
        if (std::isfinite(r.min_distance)) min_dist.push_back(r.min_distance);
        cost.push_back(r.positional_cost);
        wall.push_back(r.mean_step_wall_time_ms);
        length.push_back(r.episode_length);
    }
    agg.success_rate =
        agg.episodes_included > 0 ? 100.0 * successes / agg.episodes_included : 0.0;
    agg.collision_norm = stats_over(collision);
    agg.min_distance = stats_over(min_dist);
    agg.positional_cost = stats_over(cost);
    agg.mean_step_wall_time_ms = stats_over(wall);
    agg.episode_length = stats_over(length);
    return agg;
}

BatchResult run_batch(const std::vector<ScenarioConfig>& scenarios,
                      const std::vector<PedestrianTrack>& tracks, int workers,
                      const EpisodeOptions& options) {
    BatchResult result;
    result.episodes.resize(scenarios.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                auto forecaster = make_forecaster(scenarios[i], tracks);
                result.episodes[i] = run_episode(scenarios[i], tracks, *forecaster, options);
            } catch (const std::exception& ex) {
                result.episodes[i] = {};
                result.episodes[i].metrics.failed = true;
                result.episodes[i].metrics.error = ex.what();
                result.episodes[i].metrics.seed = scenarios[i].rng_seed;
                result.episodes[i].metrics.epsilon = scenarios[i].epsilon;
            }
            result.episodes[i].metrics.episode_id = static_cast<int>(i);
        }
    };

    workers = std::max(1, std::min<int>(workers, static_cast<int>(scenarios.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<MetricsRecord> metrics;
    metrics.reserve(result.episodes.size());
    for (const auto& ep : result.episodes) metrics.push_back(ep.metrics);
    result.aggregate = aggregate_metrics(metrics);
    return result;
}

}  // namespace drnav
