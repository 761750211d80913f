#include <doctest.h>

#include <cstdlib>

#include "drnav/scenario.hpp"

using namespace drnav;

TEST_CASE("parse_scenario reads flat key-value documents") {
    ScenarioConfig c = parse_scenario(
        "# gauntlet\n"
        "robot_start = 0 0\n"
        "robot_goal = 6 0\n"
        "epsilon = 0.05\n"
        "horizon_k = 20\n"
        "dt = 0.1\n"
        "dt_forecast = 0.4\n"
        "q = 0.5\n"
        "r_ctrl = 0.05 0 0 0.05\n"
        "forecaster = replay_oracle\n"
        "seed = 42\n");
    CHECK(c.robot_goal == Vec2(6, 0));
    CHECK(c.epsilon == 0.05);
    CHECK(c.horizon_K == 20);
    CHECK(c.Q == 0.5 * Mat2::Identity());
    CHECK(c.R == 0.05 * Mat2::Identity());
    CHECK(c.forecaster == ForecasterKind::ReplayOracle);
    CHECK(c.rng_seed == 42);
    c.validate();
}

TEST_CASE("parse_scenario rejects unknown keys by name") {
    CHECK_THROWS_WITH_AS(parse_scenario("no_such_key = 1\n"),
                         doctest::Contains("no_such_key"), std::runtime_error);
}

TEST_CASE("scenario validation rejects bad values") {
    ScenarioConfig c;
    SUBCASE("epsilon out of range") {
        c.epsilon = 1.5;
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("epsilon"), std::runtime_error);
    }
    SUBCASE("dt must divide dt_forecast") {
        c.dt = 0.3;
        c.dt_forecast = 0.4;
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("divide"), std::runtime_error);
    }
    SUBCASE("M >= 2") {
        c.forecast_samples = 1;
        CHECK_THROWS_AS(c.validate(), std::runtime_error);
    }
    SUBCASE("weights must be PSD") {
        c.Q << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1, 3
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("positive semidefinite"),
                             std::runtime_error);
    }
    SUBCASE("asymmetric weight rejected") {
        c.R << 1.0, 0.5, 0.0, 1.0;
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("symmetric"), std::runtime_error);
    }
    SUBCASE("goal mixture needs goals") {
        c.forecaster = ForecasterKind::GoalMixture;
        CHECK_THROWS_AS(c.validate(), std::runtime_error);
    }
    SUBCASE("defaults are valid") { c.validate(); }
}

TEST_CASE("environment variables override scenario keys") {
    ScenarioConfig c = parse_scenario("epsilon = 0.1\n");
    ::setenv("DRNAV_EPSILON", "0.25", 1);
    apply_env_overrides(c);
    ::unsetenv("DRNAV_EPSILON");
    CHECK(c.epsilon == 0.25);
}

TEST_CASE("matrix keys accept 1 or 4 values only") {
    CHECK_THROWS_AS(parse_scenario("q = 1 2\n"), std::runtime_error);
    ScenarioConfig c = parse_scenario("q = 1 0 0 2\n");
    CHECK(c.Q(1, 1) == 2.0);
}
