#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace drnav {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class ForecasterKind { ConstantVelocity, GoalMixture, ReplayOracle };

enum class ConstraintMode { DrCvar, SoftPenalty };

struct WeightedGoal {
    Vec2 goal = Vec2::Zero();
    double weight = 1.0;
};

// Flat scenario description. Every field maps to one `key = value` line in a
// scenario file; see parse_scenario for key names.
struct ScenarioConfig {
    Vec2 robot_start = Vec2::Zero();
    Vec2 robot_goal = Vec2::Zero();
    double epsilon = 0.1;          // allowable collision probability
    int horizon_K = 40;            // planning steps
    double dt = 0.1;               // controller step, s
    double dt_forecast = 0.4;      // forecaster step, s
    double u_max = 2.0;            // per-axis input bound, m/s
    double robot_radius = 0.4;     // collision threshold r, m
    int forecast_samples = 30;     // M Monte Carlo trajectories

    int cem_iterations = 5;
    int cem_samples = 400;
    int cem_elites = 40;
    double cem_init_std = 1.0;     // sampling std each planning step, m/s
    double sigma_floor = 1e-3;     // lower bound on CEM std, m/s

    Mat2 Q = 0.5 * Mat2::Identity();
    Mat2 R = 0.05 * Mat2::Identity();
    Mat2 Q_terminal = 0.5 * Mat2::Identity();
    double discount_gamma = 0.99;
    bool terminal_goal_offset = false;  // false = terminal cost about the origin

    std::uint64_t rng_seed = 1;
    double episode_duration = 20.0;  // s
    double frame_rate = 2.5;         // dataset frames per second
    double goal_tol = 0.2;           // m

    ForecasterKind forecaster = ForecasterKind::ConstantVelocity;
    double forecast_noise_std = 0.1;        // m per forecast step
    std::vector<WeightedGoal> forecast_goals;  // goal_mixture only

    double delta_reg = 1e-6;     // covariance regularization, m^2
    double d_min_margin = 1e-3;  // safe-ellipsoid feasibility margin over r, m

    ConstraintMode constraint_mode = ConstraintMode::DrCvar;
    double soft_penalty_weight = 100.0;  // SoftPenalty mode only
    double soft_penalty_margin = 0.4;    // m, distance under which penalty kicks in

    double d_min() const { return robot_radius + d_min_margin; }
    int steps_per_forecast() const;

    // Throws std::runtime_error naming the violated invariant.
    void validate() const;
};

// Parses a flat `key = value` document ('#' comments, one scenario per file).
// Unknown keys are rejected by name. Matrix keys (q, r_ctrl, q_terminal)
// accept one value (scalar * identity) or four (row-major 2x2).
ScenarioConfig parse_scenario(const std::string& text);

ScenarioConfig load_scenario_file(const std::string& path);

// Applies `DRNAV_<UPPERCASE_KEY>` environment variables on top of a parsed
// config, e.g. DRNAV_EPSILON=0.05.
void apply_env_overrides(ScenarioConfig& config);

std::string to_string(ForecasterKind kind);

}  // namespace drnav
