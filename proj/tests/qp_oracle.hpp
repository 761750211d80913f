#pragma once

// Box-constrained convex QP oracle for the robot-only objective. Assembles
// the dense Hessian over the stacked control vector and minimizes with
// projected accelerated gradient descent. Used only to cross-check the CEM
// optimizer; shares no code with it beyond the cost definition it targets.

#include <Eigen/Dense>

#include "drnav/cem.hpp"

namespace drnav_test {

struct QpSolution {
    drnav::ControlSequence sequence;
    double cost = 0.0;  // evaluated with drnav::trajectory_cost
};

inline QpSolution solve_box_qp(const drnav::Vec2& x0, const drnav::PlannerConfig& cfg) {
    using drnav::Mat2;
    using drnav::Vec2;
    const int K = cfg.horizon_K;
    const int n = 2 * K;
    const double dt = cfg.dt;

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

    // Stage terms: x^k - goal = (x0 - goal) + dt * sum_{i<k} u_i.
    auto add_quadratic = [&](int upto, const Mat2& W, const Vec2& offset, double scale) {
        for (int i = 0; i < upto; ++i) {
            for (int j = 0; j < upto; ++j) {
                H.block<2, 2>(2 * i, 2 * j) += 2.0 * scale * dt * dt * W;
            }
            b.segment<2>(2 * i) += 2.0 * scale * dt * (W * offset);
        }
    };

    double discount = 1.0;
    for (int k = 0; k < K; ++k) {
        add_quadratic(k, cfg.Q, x0 - cfg.goal, discount);
        H.block<2, 2>(2 * k, 2 * k) += 2.0 * discount * cfg.R;
        discount *= cfg.gamma;
    }
    Vec2 terminal_offset = cfg.terminal_goal_offset ? Vec2(x0 - cfg.goal) : x0;
    add_quadratic(K, cfg.Q_terminal, terminal_offset, 1.0);

    // Lipschitz constant via power iteration.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
    double lip = 1.0;
    for (int it = 0; it < 200; ++it) {
        v = (H * v).eval();
        lip = v.norm();
        if (lip == 0.0) break;
        v /= lip;
    }
    double step = 1.0 / std::max(lip, 1e-9);

    auto project = [&](Eigen::VectorXd& u) {
        u = u.cwiseMax(-cfg.u_max).cwiseMin(cfg.u_max);
    };

    // Projected gradient descent; the problem is strongly convex (R > 0), so
    // a fixed 1/L step converges linearly and this iteration count reaches
    // machine precision.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < 60000; ++it) {
        u -= step * (H * u + b);
        project(u);
    }

    QpSolution sol;
    sol.sequence.u.resize(K, 2);
    for (int k = 0; k < K; ++k) {
        sol.sequence.u(k, 0) = u(2 * k);
        sol.sequence.u(k, 1) = u(2 * k + 1);
    }
    auto positions = drnav::rollout(x0, sol.sequence, dt);
    sol.cost = drnav::trajectory_cost(positions, sol.sequence, cfg.goal, cfg.Q, cfg.R,
                                      cfg.Q_terminal, cfg.gamma, cfg.terminal_goal_offset);
    return sol;
}

}  // namespace drnav_test
