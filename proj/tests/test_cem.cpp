#include <doctest.h>

#include <cmath>

#include "drnav/cem.hpp"
#include "qp_oracle.hpp"

using namespace drnav;

namespace {

ControlSequence constant_sequence(int K, const Vec2& v) {
    ControlSequence seq;
    seq.u.resize(K, 2);
    for (int k = 0; k < K; ++k) seq.u.row(k) = v.transpose();
    return seq;
}

PlannerConfig test_config(int K = 10) {
    PlannerConfig cfg;
    cfg.horizon_K = K;
    cfg.eval_threads = 1;
    return cfg;
}

MomentField static_ped_field(int ped_id, const Vec2& pos, double var, int K) {
    MomentField field;
    field.ped_id = ped_id;
    field.steps.assign(K, {pos, var * Mat2::Identity()});
    return field;
}

}  // namespace

TEST_CASE("rollout integrates the single integrator") {
    auto positions = rollout(Vec2(0, 0), constant_sequence(3, Vec2(1, 0)), 0.1);
    REQUIRE(positions.size() == 4);
    CHECK(positions[0] == Vec2(0, 0));
    CHECK(positions[1].x() == doctest::Approx(0.1));
    CHECK(positions[2].x() == doctest::Approx(0.2));
    CHECK(positions[3].x() == doctest::Approx(0.3));

    SUBCASE("zero input holds position") {
        auto still = rollout(Vec2(2, -1), constant_sequence(5, Vec2(0, 0)), 0.1);
        for (const auto& p : still) CHECK(p == Vec2(2, -1));
    }
    SUBCASE("superposition") {
        Rng rng = derive_rng(61, 1);
        ControlSequence a = constant_sequence(6, Vec2(0.3, -0.2));
        ControlSequence b = constant_sequence(6, Vec2(-0.1, 0.5));
        for (int k = 0; k < 6; ++k) {
            a.u(k, 0) += uniform01(rng);
            b.u(k, 1) += uniform01(rng);
        }
        ControlSequence sum;
        sum.u = a.u + b.u;
        auto ra = rollout(Vec2(1, 1), a, 0.1);
        auto rb = rollout(Vec2(0, 0), b, 0.1);
        auto rs = rollout(Vec2(1, 1), sum, 0.1);
        for (std::size_t i = 0; i < rs.size(); ++i) {
            CHECK(rs[i].x() == doctest::Approx(ra[i].x() + rb[i].x()));
            CHECK(rs[i].y() == doctest::Approx(ra[i].y() + rb[i].y()));
        }
    }
}

TEST_CASE("trajectory cost matches the printed objective") {
    Mat2 Q = 0.5 * Mat2::Identity();
    Mat2 R = 0.05 * Mat2::Identity();
    Mat2 Qt = 0.5 * Mat2::Identity();

    SUBCASE("at the goal with zero input the cost is zero") {
        auto seq = constant_sequence(4, Vec2(0, 0));
        auto pos = rollout(Vec2(0, 0), seq, 0.1);
        CHECK(trajectory_cost(pos, seq, Vec2(0, 0), Q, R, Qt, 0.99, false) == 0.0);
    }
    SUBCASE("hand-expanded single step") {
        // x0 = (1,0), goal origin, u = 0: stage 0.5, terminal (x^1)^T Qt x^1 = 0.5
        auto seq = constant_sequence(1, Vec2(0, 0));
        auto pos = rollout(Vec2(1, 0), seq, 0.1);
        CHECK(trajectory_cost(pos, seq, Vec2(0, 0), Q, R, Qt, 0.99, false) ==
              doctest::Approx(1.0));
    }
    SUBCASE("doubling R doubles only the control quadratic") {
        auto seq = constant_sequence(5, Vec2(1, 1));
        auto pos = rollout(Vec2(2, 0), seq, 0.1);
        Vec2 goal(0, 0);
        double base = trajectory_cost(pos, seq, goal, Q, R, Qt, 0.99, false);
        double doubled = trajectory_cost(pos, seq, goal, Q, 2.0 * R, Qt, 0.99, false);
        double zero_r = trajectory_cost(pos, seq, goal, Q, 0.0 * R, Qt, 0.99, false);
        CHECK(doubled - base == doctest::Approx(base - zero_r));
    }
    SUBCASE("terminal_goal_offset recenters the terminal term") {
        auto seq = constant_sequence(1, Vec2(0, 0));
        auto pos = rollout(Vec2(1, 0), seq, 0.1);
        // with the offset, terminal = 0 at... x^1 = (1,0), goal (1,0): stage 0 + terminal 0
        CHECK(trajectory_cost(pos, seq, Vec2(1, 0), Q, R, Qt, 0.99, true) == doctest::Approx(0.0));
    }
}

TEST_CASE("evaluate_sequence vacuous and adversarial pedestrians") {
    PlannerConfig cfg = test_config(8);
    auto seq = constant_sequence(8, Vec2(1, 0));

    SUBCASE("no pedestrians: feasible with g = -1 everywhere") {
        auto eval = evaluate_sequence(Vec2(0, 0), seq, {}, cfg);
        CHECK(eval.report.feasible);
        for (double g : eval.report.per_step_g) CHECK(g == -1.0);
        for (int w : eval.report.worst_ped_per_step) CHECK(w == -1);
    }
    SUBCASE("far pedestrian with tiny covariance: feasible") {
        auto field = static_ped_field(3, Vec2(50, 50), 1e-6, 8);
        auto eval = evaluate_sequence(Vec2(0, 0), seq, {field}, cfg);
        CHECK(eval.report.feasible);
    }
    SUBCASE("pedestrian sitting on the path: infeasible with the large constant") {
        auto field = static_ped_field(3, Vec2(0.4, 0), 1e-6, 8);
        auto eval = evaluate_sequence(Vec2(0, 0), seq, {field}, cfg);
        CHECK_FALSE(eval.report.feasible);
        bool saw_infeasible_geometry = false;
        for (double g : eval.report.per_step_g)
            if (g == kInfeasibleBound) saw_infeasible_geometry = true;
        CHECK(saw_infeasible_geometry);
    }
}

TEST_CASE("evaluate_batch equals element-wise evaluation bit for bit") {
    PlannerConfig cfg = test_config(12);
    Rng rng = derive_rng(62, 2);
    std::vector<ControlSequence> seqs;
    for (int n = 0; n < 3; ++n) {
        ControlSequence seq;
        seq.u.resize(12, 2);
        for (int k = 0; k < 12; ++k) {
            Vec2 z = gaussian2(rng);
            seq.u(k, 0) = z.x();
            seq.u(k, 1) = z.y();
        }
        seqs.push_back(seq);
    }
    std::vector<MomentField> fields = {static_ped_field(1, Vec2(1.0, 0.3), 0.02, 12),
                                       static_ped_field(2, Vec2(-0.5, 0.8), 0.05, 12)};

    for (int threads : {1, 4}) {
        cfg.eval_threads = threads;
        auto batch = evaluate_batch(Vec2(0, 0), seqs, fields, cfg);
        REQUIRE(batch.size() == 3);
        for (int i = 0; i < 3; ++i) {
            auto single = evaluate_sequence(Vec2(0, 0), seqs[i], fields, cfg);
            CHECK(batch[i].cost == single.cost);
            CHECK(batch[i].report.risk_score == single.report.risk_score);
            CHECK(batch[i].report.feasible == single.report.feasible);
            for (int k = 0; k < 12; ++k) {
                CHECK(batch[i].report.per_step_g[k] == single.report.per_step_g[k]);
                CHECK(batch[i].report.worst_ped_per_step[k] ==
                      single.report.worst_ped_per_step[k]);
            }
        }
    }
}

TEST_CASE("elite selection: safety precedence and padding") {
    auto mk = [](double cost, bool feasible, double risk) {
        SequenceEval ev;
        ev.cost = cost;
        ev.report.feasible = feasible;
        ev.report.risk_score = risk;
        return ev;
    };

    SUBCASE("enough feasible: lowest-cost feasible only") {
        std::vector<SequenceEval> evals = {mk(5, true, -1), mk(1, false, -9), mk(3, true, -1),
                                           mk(2, true, -1), mk(9, true, -1)};
        auto elites = select_elites(evals, 3);
        REQUIRE(elites.size() == 3);
        CHECK(elites[0] == 3);  // cost 2
        CHECK(elites[1] == 2);  // cost 3
        CHECK(elites[2] == 0);  // cost 5; the infeasible cost-1 sample is excluded
        for (int idx : elites) CHECK(evals[idx].report.feasible);
    }
    SUBCASE("none feasible: lowest risk score") {
        std::vector<SequenceEval> evals = {mk(1, false, 4), mk(2, false, 2), mk(3, false, 9)};
        auto elites = select_elites(evals, 2);
        CHECK(elites[0] == 1);
        CHECK(elites[1] == 0);
    }
    SUBCASE("partial: all feasible first, padded by risk score") {
        std::vector<SequenceEval> evals = {mk(7, true, -1), mk(1, false, 3), mk(4, false, 1),
                                           mk(6, true, -1)};
        auto elites = select_elites(evals, 3);
        REQUIRE(elites.size() == 3);
        CHECK(elites[0] == 3);  // feasible, cost 6
        CHECK(elites[1] == 0);  // feasible, cost 7
        CHECK(elites[2] == 2);  // infeasible with the better risk score
    }
}

TEST_CASE("plan is deterministic given the seed and respects the box") {
    PlannerConfig cfg = test_config(20);
    cfg.goal = Vec2(3, 1);
    cfg.iterations = 4;
    cfg.num_samples = 120;
    cfg.num_elites = 12;

    Rng rng_a = derive_rng(63, 3);
    CemPlanner planner_a(cfg);
    auto res_a = planner_a.plan(Vec2(0, 0), {}, rng_a);

    Rng rng_b = derive_rng(63, 3);
    CemPlanner planner_b(cfg);
    auto res_b = planner_b.plan(Vec2(0, 0), {}, rng_b);

    CHECK(res_a.u0.x() == res_b.u0.x());
    CHECK(res_a.u0.y() == res_b.u0.y());
    CHECK(res_a.cost == res_b.cost);

    CHECK(std::abs(res_a.u0.x()) <= cfg.u_max);
    CHECK(std::abs(res_a.u0.y()) <= cfg.u_max);
    for (int k = 0; k < 20; ++k) {
        CHECK(std::abs(res_a.sequence.u(k, 0)) <= cfg.u_max);
        CHECK(std::abs(res_a.sequence.u(k, 1)) <= cfg.u_max);
    }

    SUBCASE("best feasible cost is non-increasing across iterations") {
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& it : res_a.iterations) {
            CHECK(it.best_feasible_cost_so_far <= prev);
            prev = it.best_feasible_cost_so_far;
        }
    }
}

TEST_CASE("unconstrained CEM lands within 5% of the QP oracle") {
    PlannerConfig cfg = test_config(40);
    cfg.iterations = 20;
    cfg.num_samples = 1000;
    cfg.num_elites = 100;

    Rng pair_rng = derive_rng(64, 4);
    for (int trial = 0; trial < 3; ++trial) {
        Vec2 x0(4.0 * uniform01(pair_rng) - 2.0, 4.0 * uniform01(pair_rng) - 2.0);
        Vec2 goal(8.0 * uniform01(pair_rng) - 4.0, 8.0 * uniform01(pair_rng) - 4.0);
        cfg.goal = goal;

        auto qp = drnav_test::solve_box_qp(x0, cfg);

        CemPlanner planner(cfg);
        Rng rng = derive_rng(65, static_cast<std::uint64_t>(trial));
        auto res = planner.plan(x0, {}, rng);

        INFO("trial " << trial << ": cem " << res.cost << " vs qp " << qp.cost);
        CHECK(res.cost <= 1.05 * qp.cost + 1e-9);
        CHECK(res.cost >= qp.cost - 1e-6);  // the oracle really is the optimum
    }
}

TEST_CASE("invalid planner config is rejected before sampling") {
    PlannerConfig cfg = test_config(5);
    cfg.num_elites = 50;
    cfg.num_samples = 10;
    CHECK_THROWS_AS(CemPlanner{cfg}, std::runtime_error);
}
