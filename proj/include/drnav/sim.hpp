#pragma once

#include <limits>
#include <string>
#include <vector>

#include "drnav/cem.hpp"
#include "drnav/forecast.hpp"

namespace drnav {

struct RobotState {
    Vec2 position = Vec2::Zero();
    double time = 0.0;
};

struct MetricsRecord {
    double collision_norm = 0.0;  // seconds in collision per 10 s of episode
    double min_distance = std::numeric_limits<double>::infinity();
    bool success = false;
    double positional_cost = 0.0;            // m^2 s
    double mean_step_wall_time_ms = 0.0;
    double episode_length = 0.0;             // s
    int collision_steps = 0;                 // control steps with any distance < r
    int collision_events = 0;                // edge-triggered entries into collision
    bool reached_goal = false;
    bool initial_state_collision = false;    // pedestrian within r of the start at t = 0
    bool failed = false;                     // episode aborted with an error
    std::string error;
    int episode_id = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
};

struct EpisodeOptions {
    bool disable_control = false;  // robot holds its start position
    bool verbose_log = false;      // include per-pedestrian moments in the log
    int eval_threads = 1;
};

struct EpisodeResult {
    MetricsRecord metrics;
    std::string trajectory_log;  // one JSON record per control step
};

// The pedestrian's past as the robot has observed it: recorded track samples
// up to time t plus the current interpolated position.
PedHistory observed_history(const PedestrianTrack& track, double t);

// Closed-loop episode: replays pedestrians at dt, refreshes forecasts at
// every dt_forecast boundary, re-aligns moment fields and plans at every dt,
// applies the first control, and accumulates metrics. (scenario, tracks,
// seed) fully determine the trajectory log.
EpisodeResult run_episode(const ScenarioConfig& scenario,
                          const std::vector<PedestrianTrack>& tracks,
                          const Forecaster& forecaster, const EpisodeOptions& options = {});

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
    int count = 0;
};

struct Aggregate {
    int episodes_total = 0;
    int episodes_included = 0;  // excludes initial-state collisions and failures
    int episodes_failed = 0;
    int initial_state_collisions = 0;
    double success_rate = 0.0;  // percent of included episodes
    MetricStats collision_norm;
    MetricStats min_distance;   // over included episodes that met a pedestrian
    MetricStats positional_cost;
    MetricStats mean_step_wall_time_ms;
    MetricStats episode_length;
};

Aggregate aggregate_metrics(const std::vector<MetricsRecord>& records);

struct BatchResult {
    std::vector<EpisodeResult> episodes;
    Aggregate aggregate;
};

// Independent episodes fanned out over `workers` threads; each scenario
// carries its own seed. A throwing episode is recorded as failed and the
// batch continues.
BatchResult run_batch(const std::vector<ScenarioConfig>& scenarios,
                      const std::vector<PedestrianTrack>& tracks, int workers,
                      const EpisodeOptions& options = {});

}  // namespace drnav
