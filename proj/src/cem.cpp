#include "drnav/cem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace drnav {

PlannerConfig PlannerConfig::from_scenario(const ScenarioConfig& s) {
    PlannerConfig cfg;
    cfg.horizon_K = s.horizon_K;
    cfg.dt = s.dt;
    cfg.u_max = s.u_max;
    cfg.iterations = s.cem_iterations;
    cfg.num_samples = s.cem_samples;
    cfg.num_elites = s.cem_elites;
    cfg.init_std = s.cem_init_std;
    cfg.sigma_floor = s.sigma_floor;
    cfg.epsilon = s.epsilon;
    cfg.gamma = s.discount_gamma;
    cfg.Q = s.Q;
    cfg.R = s.R;
    cfg.Q_terminal = s.Q_terminal;
    cfg.terminal_goal_offset = s.terminal_goal_offset;
    cfg.goal = s.robot_goal;
    cfg.robot_radius = s.robot_radius;
    cfg.d_min = s.d_min();
    cfg.constraint_mode = s.constraint_mode;
    cfg.soft_penalty_weight = s.soft_penalty_weight;
    cfg.soft_penalty_margin = s.soft_penalty_margin;
    return cfg;
}

void PlannerConfig::validate() const {
    auto fail = [](const char* msg) { throw std::runtime_error(std::string("planner config: ") + msg); };
    if (horizon_K < 1) fail("horizon_K must be >= 1");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(u_max > 0.0)) fail("u_max must be positive");
    if (iterations < 1) fail("iterations must be >= 1");
    if (num_elites < 1) fail("num_elites must be >= 1");
    if (num_samples < num_elites) fail("num_samples must be >= num_elites");
    if (!(init_std > 0.0)) fail("init_std must be positive");
    if (!(sigma_floor > 0.0)) fail("sigma_floor must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
    if (!(robot_radius > 0.0)) fail("robot_radius must be positive");
    if (!(d_min > robot_radius)) fail("d_min must exceed robot_radius");
}

std::vector<Vec2> rollout(const Vec2& x0, const ControlSequence& u, double dt) {
    const int K = u.horizon();
    std::vector<Vec2> positions(K + 1);
    positions[0] = x0;
    for (int k = 0; k < K; ++k) positions[k + 1] = positions[k] + u.u.row(k).transpose() * dt;
    return positions;
}

double trajectory_cost(const std::vector<Vec2>& positions, const ControlSequence& u,
                       const Vec2& goal, const Mat2& Q, const Mat2& R, const Mat2& Q_terminal,
                       double gamma, bool terminal_goal_offset) {
    const int K = u.horizon();
    if (static_cast<int>(positions.size()) != K + 1)
        throw std::runtime_error("trajectory_cost: positions/controls length mismatch");
    double cost = 0.0;
    double discount = 1.0;
    for (int k = 0; k < K; ++k) {
        Vec2 dx = positions[k] - goal;
        Vec2 uk = u.u.row(k).transpose();
        cost += discount * (dx.dot(Q * dx) + uk.dot(R * uk));
        discount *= gamma;
    }
    Vec2 xt = terminal_goal_offset ? Vec2(positions[K] - goal) : positions[K];
    cost += xt.dot(Q_terminal * xt);
    return cost;
}

SequenceEval evaluate_sequence(const Vec2& x0, const ControlSequence& u,
                               const std::vector<MomentField>& moment_fields,
                               const PlannerConfig& cfg) {
    const int K = u.horizon();
    std::vector<Vec2> positions = rollout(x0, u, cfg.dt);

    SequenceEval out;
    out.cost = trajectory_cost(positions, u, cfg.goal, cfg.Q, cfg.R, cfg.Q_terminal, cfg.gamma,
                               cfg.terminal_goal_offset);

    RiskReport& report = out.report;
    report.per_step_g.assign(K, -1.0);
    report.worst_ped_per_step.assign(K, -1);

    if (cfg.constraint_mode == ConstraintMode::SoftPenalty) {
        // Constraint disabled: penalize proximity to the forecast means only.
        double penalty = 0.0;
        double discount = 1.0;
        for (int k = 1; k <= K; ++k) {
            discount *= cfg.gamma;
            for (const auto& field : moment_fields) {
                double dist = (positions[k] - field.steps[k - 1].mu).norm();
                double gap = cfg.soft_penalty_margin - dist;
                if (gap > 0.0) penalty += discount * cfg.soft_penalty_weight * gap * gap;
            }
        }
        out.cost += penalty;
        report.feasible = true;
        report.risk_score = risk_score(report.per_step_g, cfg.gamma);
        return out;
    }

    const std::size_t P = moment_fields.size();
    std::vector<SafeEllipsoid> ellipsoids(P);
    std::vector<Mat2> sigmas(P);
    std::vector<int> ped_ids(P);
    bool feasible = true;
    for (int k = 1; k <= K; ++k) {
        for (std::size_t i = 0; i < P; ++i) {
            const MomentStep& step = moment_fields[i].steps[k - 1];
            ellipsoids[i] = build_safe_ellipsoid(step.mu, positions[k], cfg.robot_radius, cfg.d_min);
            sigmas[i] = step.sigma;
            ped_ids[i] = moment_fields[i].ped_id;
        }
        auto [g, worst] = step_constraint(ellipsoids, sigmas, ped_ids, cfg.epsilon);
        report.per_step_g[k - 1] = g;
        report.worst_ped_per_step[k - 1] = worst;
        if (g > 0.0) feasible = false;
    }
    report.feasible = feasible;
    report.risk_score = risk_score(report.per_step_g, cfg.gamma);
    return out;
}

std::vector<SequenceEval> evaluate_batch(const Vec2& x0,
                                         const std::vector<ControlSequence>& sequences,
                                         const std::vector<MomentField>& moment_fields,
                                         const PlannerConfig& cfg) {
    for (const auto& field : moment_fields) {
        if (static_cast<int>(field.steps.size()) < cfg.horizon_K)
            throw std::runtime_error("moment field for pedestrian " +
                                     std::to_string(field.ped_id) +
                                     " does not cover the planning horizon");
    }

    std::vector<SequenceEval> evals(sequences.size());
    const int n = static_cast<int>(sequences.size());
    int threads = std::min(cfg.eval_threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) evals[i] = evaluate_sequence(x0, sequences[i], moment_fields, cfg);
        return evals;
    }

    // Each worker owns a contiguous index range; outputs land by index, so
    // scheduling cannot change the result.
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        int begin = static_cast<int>(static_cast<long long>(n) * w / threads);
        int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / threads);
        pool.emplace_back([&, begin, end]() {
            for (int i = begin; i < end; ++i)
                evals[i] = evaluate_sequence(x0, sequences[i], moment_fields, cfg);
        });
    }
    for (auto& t : pool) t.join();
    return evals;
}

std::vector<int> select_elites(const std::vector<SequenceEval>& evals, int n_elite) {
    if (n_elite < 1 || n_elite > static_cast<int>(evals.size()))
        throw std::runtime_error("select_elites: bad elite count");

    std::vector<int> feasible, infeasible;
    for (int i = 0; i < static_cast<int>(evals.size()); ++i)
        (evals[i].report.feasible ? feasible : infeasible).push_back(i);

    auto by_cost = [&evals](int a, int b) {
        return evals[a].cost != evals[b].cost ? evals[a].cost < evals[b].cost : a < b;
    };
    auto by_risk = [&evals](int a, int b) {
        return evals[a].report.risk_score != evals[b].report.risk_score
                   ? evals[a].report.risk_score < evals[b].report.risk_score
                   : a < b;
    };

    std::vector<int> elites;
    elites.reserve(n_elite);
    if (static_cast<int>(feasible.size()) >= n_elite) {
        std::sort(feasible.begin(), feasible.end(), by_cost);
        elites.assign(feasible.begin(), feasible.begin() + n_elite);
    } else if (feasible.empty()) {
        std::sort(infeasible.begin(), infeasible.end(), by_risk);
        elites.assign(infeasible.begin(), infeasible.begin() + n_elite);
    } else {
        std::sort(feasible.begin(), feasible.end(), by_cost);
        std::sort(infeasible.begin(), infeasible.end(), by_risk);
        elites = feasible;
        elites.insert(elites.end(), infeasible.begin(),
                      infeasible.begin() + (n_elite - static_cast<int>(feasible.size())));
    }
    return elites;
}

CemPlanner::CemPlanner(PlannerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void CemPlanner::reset_warm_start() { has_warm_start_ = false; }

PlanResult CemPlanner::plan(const Vec2& x0, const std::vector<MomentField>& moment_fields,
                            Rng& rng) {
    const int K = cfg_.horizon_K;
    const int N = cfg_.num_samples;
    using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

    SampleMatrix mu(K, 2);
    if (has_warm_start_) {
        // Previous solution shifted one step, last input repeated.
        mu.topRows(K - 1) = warm_mu_.bottomRows(K - 1);
        mu.row(K - 1) = warm_mu_.row(K - 1);
    } else {
        Vec2 v = (cfg_.goal - x0) / (K * cfg_.dt);
        v = v.cwiseMax(-cfg_.u_max).cwiseMin(cfg_.u_max);
        mu = v.transpose().replicate(K, 1);
    }
    SampleMatrix sigma = SampleMatrix::Constant(K, 2, cfg_.init_std);

    PlanResult result;
    ControlSequence best_feasible_seq;
    double best_feasible_cost = std::numeric_limits<double>::infinity();
    double best_feasible_risk = 0.0;
    double best_risk_score = std::numeric_limits<double>::infinity();

    std::vector<ControlSequence> samples(N);
    for (auto& s : samples) s.u.resize(K, 2);

    std::vector<int> elites;
    for (int iter = 0; iter < cfg_.iterations; ++iter) {
        for (int n = 0; n < N; ++n) {
            for (int k = 0; k < K; ++k) {
                Vec2 z = gaussian2(rng);
                double ux = mu(k, 0) + sigma(k, 0) * z.x();
                double uy = mu(k, 1) + sigma(k, 1) * z.y();
                samples[n].u(k, 0) = std::clamp(ux, -cfg_.u_max, cfg_.u_max);
                samples[n].u(k, 1) = std::clamp(uy, -cfg_.u_max, cfg_.u_max);
            }
        }

        std::vector<SequenceEval> evals = evaluate_batch(x0, samples, moment_fields, cfg_);

        IterationDiagnostics diag;
        for (int i = 0; i < N; ++i) {
            const SequenceEval& ev = evals[i];
            if (ev.report.feasible) {
                ++diag.feasible_count;
                diag.best_cost = std::min(diag.best_cost, ev.cost);
                if (ev.cost < best_feasible_cost) {
                    best_feasible_cost = ev.cost;
                    best_feasible_seq = samples[i];
                    best_feasible_risk = ev.report.risk_score;
                }
            }
            diag.best_risk_score = std::min(diag.best_risk_score, ev.report.risk_score);
            best_risk_score = std::min(best_risk_score, ev.report.risk_score);
        }
        diag.best_feasible_cost_so_far = best_feasible_cost;
        result.iterations.push_back(diag);

        elites = select_elites(evals, cfg_.num_elites);

        // Refit to the elite set (population statistics, per step and axis).
        mu.setZero();
        for (int idx : elites) mu += samples[idx].u;
        mu /= static_cast<double>(elites.size());
        SampleMatrix var = SampleMatrix::Zero(K, 2);
        for (int idx : elites) {
            SampleMatrix d = samples[idx].u - mu;
            var += d.cwiseProduct(d);
        }
        var /= static_cast<double>(elites.size());
        sigma = var.cwiseSqrt().cwiseMax(cfg_.sigma_floor);

        if (iter + 1 == cfg_.iterations) {
            // Final answer: best elite of the final iteration, falling back
            // to the best feasible sequence seen when the elites are not.
            int best_idx = elites.front();
            if (evals[best_idx].report.feasible) {
                result.sequence = samples[best_idx];
                result.cost = evals[best_idx].cost;
                result.risk_score_value = evals[best_idx].report.risk_score;
                result.from_feasible = true;
            } else if (std::isfinite(best_feasible_cost)) {
                result.sequence = best_feasible_seq;
                result.cost = best_feasible_cost;
                result.risk_score_value = best_feasible_risk;
                result.from_feasible = true;
            } else {
                result.sequence = samples[best_idx];
                result.cost = evals[best_idx].cost;
                result.risk_score_value = evals[best_idx].report.risk_score;
                result.from_feasible = false;
            }
        }
    }

    result.best_feasible_cost = best_feasible_cost;
    result.best_risk_score = best_risk_score;
    result.u0 = result.sequence.u.row(0).transpose();
    warm_mu_ = result.sequence.u;
    has_warm_start_ = true;
    return result;
}

}  // namespace drnav
