#pragma once

#include <limits>
#include <vector>

#include "drnav/moments.hpp"
#include "drnav/risk.hpp"
#include "drnav/rng.hpp"
#include "drnav/scenario.hpp"

namespace drnav {

// K-step velocity plan; row k is the input applied over [k*dt, (k+1)*dt).
struct ControlSequence {
    Eigen::Matrix<double, Eigen::Dynamic, 2> u;  // K x 2, m/s

    int horizon() const { return static_cast<int>(u.rows()); }
};

struct PlannerConfig {
    int horizon_K = 40;
    double dt = 0.1;
    double u_max = 2.0;
    int iterations = 5;
    int num_samples = 400;
    int num_elites = 40;
    double init_std = 1.0;
    double sigma_floor = 1e-3;
    double epsilon = 0.1;
    double gamma = 0.99;
    Mat2 Q = 0.5 * Mat2::Identity();
    Mat2 R = 0.05 * Mat2::Identity();
    Mat2 Q_terminal = 0.5 * Mat2::Identity();
    bool terminal_goal_offset = false;
    Vec2 goal = Vec2::Zero();
    double robot_radius = 0.4;
    double d_min = 0.401;
    ConstraintMode constraint_mode = ConstraintMode::DrCvar;
    double soft_penalty_weight = 100.0;
    double soft_penalty_margin = 0.45;
    int eval_threads = 1;  // batch evaluation fan-out; results are identical at any setting

    static PlannerConfig from_scenario(const ScenarioConfig& scenario);
    void validate() const;
};

// Single-integrator rollout: returns K+1 positions with x^{k+1} = x^k + u^k dt.
std::vector<Vec2> rollout(const Vec2& x0, const ControlSequence& u, double dt);

// sum_{k=0}^{K-1} gamma^k [(x^k - goal)^T Q (x^k - goal) + u_k^T R u_k] plus
// the terminal term, which is about the origin unless terminal_goal_offset.
double trajectory_cost(const std::vector<Vec2>& positions, const ControlSequence& u,
                       const Vec2& goal, const Mat2& Q, const Mat2& R, const Mat2& Q_terminal,
                       double gamma, bool terminal_goal_offset);

struct SequenceEval {
    double cost = 0.0;
    RiskReport report;
};

// Rolls out one sequence and scores it: objective cost plus the per-step
// worst-pedestrian DR-CVaR constraint (or the soft distance penalty when the
// constraint is disabled).
SequenceEval evaluate_sequence(const Vec2& x0, const ControlSequence& u,
                               const std::vector<MomentField>& moment_fields,
                               const PlannerConfig& cfg);

// Element-wise evaluate_sequence over the batch; pure and order-independent,
// so any eval_threads setting produces identical results.
std::vector<SequenceEval> evaluate_batch(const Vec2& x0,
                                         const std::vector<ControlSequence>& sequences,
                                         const std::vector<MomentField>& moment_fields,
                                         const PlannerConfig& cfg);

// Constrained-CEM elite rule, indices best-first:
//  - >= n_elite feasible: the n_elite lowest-cost feasible sequences;
//  - none feasible:       the n_elite lowest Risk Scores;
//  - in between:          all feasible by cost, padded by Risk Score.
std::vector<int> select_elites(const std::vector<SequenceEval>& evals, int n_elite);

struct IterationDiagnostics {
    int feasible_count = 0;
    double best_cost = std::numeric_limits<double>::infinity();  // this iteration, feasible only
    double best_risk_score = std::numeric_limits<double>::infinity();
    double best_feasible_cost_so_far = std::numeric_limits<double>::infinity();
};

struct PlanResult {
    Vec2 u0 = Vec2::Zero();
    ControlSequence sequence;  // the sequence u0 was taken from
    double cost = 0.0;
    double risk_score_value = 0.0;
    bool from_feasible = false;
    double best_feasible_cost = std::numeric_limits<double>::infinity();
    double best_risk_score = std::numeric_limits<double>::infinity();
    std::vector<IterationDiagnostics> iterations;
};

// Receding-horizon CEM optimizer. Warm-starts the sampling mean from the
// previous solution shifted by one step; the sampling std resets to init_std
// every planning step.
class CemPlanner {
public:
    explicit CemPlanner(PlannerConfig cfg);

    PlanResult plan(const Vec2& x0, const std::vector<MomentField>& moment_fields, Rng& rng);

    void reset_warm_start();
    const PlannerConfig& config() const { return cfg_; }

private:
    PlannerConfig cfg_;
    Eigen::Matrix<double, Eigen::Dynamic, 2> warm_mu_;
    bool has_warm_start_ = false;
};

}  // namespace drnav
