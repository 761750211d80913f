#include "drnav/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drnav {

namespace {

std::vector<std::string> tokenize(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& key, const std::string& tok) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("scenario key '" + key + "': bad number '" + tok + "'");
    }
}

long long to_int(const std::string& key, const std::string& tok) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("scenario key '" + key + "': bad integer '" + tok + "'");
    }
}

bool to_bool(const std::string& key, const std::string& tok) {
    if (tok == "true" || tok == "1") return true;
    if (tok == "false" || tok == "0") return false;
    throw std::runtime_error("scenario key '" + key + "': bad boolean '" + tok + "'");
}

void expect_arity(const std::string& key, const std::vector<std::string>& toks, std::size_t n) {
    if (toks.size() != n)
        throw std::runtime_error("scenario key '" + key + "': expected " + std::to_string(n) +
                                 " value(s), got " + std::to_string(toks.size()));
}

Mat2 parse_mat2(const std::string& key, const std::vector<std::string>& toks) {
    if (toks.size() == 1) return to_double(key, toks[0]) * Mat2::Identity();
    if (toks.size() == 4) {
        Mat2 m;
        m << to_double(key, toks[0]), to_double(key, toks[1]),
             to_double(key, toks[2]), to_double(key, toks[3]);
        return m;
    }
    throw std::runtime_error("scenario key '" + key + "': expected 1 or 4 values");
}

void require_psd(const std::string& name, const Mat2& m) {
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-12)
        throw std::runtime_error("scenario matrix " + name + " is not symmetric");
    double tr = m(0, 0) + m(1, 1);
    double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (tr < -1e-12 || det < -1e-12)
        throw std::runtime_error("scenario matrix " + name + " is not positive semidefinite");
}

// Shared by the file parser and environment overrides.
void apply_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
    auto toks = tokenize(value);
    if (toks.empty()) throw std::runtime_error("scenario key '" + key + "' has no value");

    if (key == "robot_start" || key == "robot_goal") {
        expect_arity(key, toks, 2);
        Vec2 v(to_double(key, toks[0]), to_double(key, toks[1]));
        (key == "robot_start" ? c.robot_start : c.robot_goal) = v;
    } else if (key == "epsilon") {
        expect_arity(key, toks, 1);
        c.epsilon = to_double(key, toks[0]);
    } else if (key == "horizon_k") {
        expect_arity(key, toks, 1);
        c.horizon_K = static_cast<int>(to_int(key, toks[0]));
    } else if (key == "dt") {
        expect_arity(key, toks, 1);
        c.dt = to_double(key, toks[0]);
    } else if (key == "dt_forecast") {
        expect_arity(key, toks, 1);
        c.dt_forecast = to_double(key, toks[0]);
    } else if (key == "u_max") {
        expect_arity(key, toks, 1);
        c.u_max = to_double(key, toks[0]);
    } else if (key == "robot_radius") {
        expect_arity(key, toks, 1);
        c.robot_radius = to_double(key, toks[0]);
    } else if (key == "forecast_samples") {
        expect_arity(key, toks, 1);
        c.forecast_samples = static_cast<int>(to_int(key, toks[0]));
    } else if (key == "cem_iterations") {
        expect_arity(key, toks, 1);
        c.cem_iterations = static_cast<int>(to_int(key, toks[0]));
    } else if (key == "cem_samples") {
        expect_arity(key, toks, 1);
        c.cem_samples = static_cast<int>(to_int(key, toks[0]));
    } else if (key == "cem_elites") {
        expect_arity(key, toks, 1);
        c.cem_elites = static_cast<int>(to_int(key, toks[0]));
    } else if (key == "cem_init_std") {
        expect_arity(key, toks, 1);
        c.cem_init_std = to_double(key, toks[0]);
    } else if (key == "sigma_floor") {
        expect_arity(key, toks, 1);
        c.sigma_floor = to_double(key, toks[0]);
    } else if (key == "q") {
        c.Q = parse_mat2(key, toks);
    } else if (key == "r_ctrl") {
        c.R = parse_mat2(key, toks);
    } else if (key == "q_terminal") {
        c.Q_terminal = parse_mat2(key, toks);
    } else if (key == "discount_gamma") {
        expect_arity(key, toks, 1);
        c.discount_gamma = to_double(key, toks[0]);
    } else if (key == "terminal_goal_offset") {
        expect_arity(key, toks, 1);
        c.terminal_goal_offset = to_bool(key, toks[0]);
    } else if (key == "seed") {
        expect_arity(key, toks, 1);
        c.rng_seed = static_cast<std::uint64_t>(to_int(key, toks[0]));
    } else if (key == "episode_duration") {
        expect_arity(key, toks, 1);
        c.episode_duration = to_double(key, toks[0]);
    } else if (key == "frame_rate") {
        expect_arity(key, toks, 1);
        c.frame_rate = to_double(key, toks[0]);
    } else if (key == "goal_tol") {
        expect_arity(key, toks, 1);
        c.goal_tol = to_double(key, toks[0]);
    } else if (key == "forecaster") {
        expect_arity(key, toks, 1);
        if (toks[0] == "constant_velocity") c.forecaster = ForecasterKind::ConstantVelocity;
        else if (toks[0] == "goal_mixture") c.forecaster = ForecasterKind::GoalMixture;
        else if (toks[0] == "replay_oracle") c.forecaster = ForecasterKind::ReplayOracle;
        else throw std::runtime_error("unknown forecaster '" + toks[0] + "'");
    } else if (key == "forecast_noise_std") {
        expect_arity(key, toks, 1);
        c.forecast_noise_std = to_double(key, toks[0]);
    } else if (key == "forecast_goals") {
        if (toks.size() % 3 != 0 || toks.empty())
            throw std::runtime_error("forecast_goals expects `x y weight` triples");
        c.forecast_goals.clear();
        for (std::size_t i = 0; i < toks.size(); i += 3)
            c.forecast_goals.push_back({Vec2(to_double(key, toks[i]), to_double(key, toks[i + 1])),
                                        to_double(key, toks[i + 2])});
    } else if (key == "delta_reg") {
        expect_arity(key, toks, 1);
        c.delta_reg = to_double(key, toks[0]);
    } else if (key == "d_min_margin") {
        expect_arity(key, toks, 1);
        c.d_min_margin = to_double(key, toks[0]);
    } else if (key == "constraint_mode") {
        expect_arity(key, toks, 1);
        if (toks[0] == "dr_cvar") c.constraint_mode = ConstraintMode::DrCvar;
        else if (toks[0] == "soft_penalty") c.constraint_mode = ConstraintMode::SoftPenalty;
        else throw std::runtime_error("unknown constraint_mode '" + toks[0] + "'");
    } else if (key == "soft_penalty_weight") {
        expect_arity(key, toks, 1);
        c.soft_penalty_weight = to_double(key, toks[0]);
    } else if (key == "soft_penalty_margin") {
        expect_arity(key, toks, 1);
        c.soft_penalty_margin = to_double(key, toks[0]);
    } else {
        throw std::runtime_error("unknown scenario key '" + key + "'");
    }
}

const char* kAllKeys[] = {
    "robot_start", "robot_goal", "epsilon", "horizon_k", "dt", "dt_forecast", "u_max",
    "robot_radius", "forecast_samples", "cem_iterations", "cem_samples", "cem_elites",
    "cem_init_std", "sigma_floor", "q", "r_ctrl", "q_terminal", "discount_gamma",
    "terminal_goal_offset", "seed", "episode_duration", "frame_rate", "goal_tol", "forecaster",
    "forecast_noise_std", "forecast_goals", "delta_reg", "d_min_margin", "constraint_mode",
    "soft_penalty_weight", "soft_penalty_margin"};

}  // namespace

int ScenarioConfig::steps_per_forecast() const {
    return static_cast<int>(std::llround(dt_forecast / dt));
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::runtime_error("invalid scenario: " + msg); };

    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
    if (horizon_K < 1) fail("horizon_k must be >= 1");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(dt_forecast > 0.0)) fail("dt_forecast must be positive");
    double ratio = dt_forecast / dt;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9 || std::llround(ratio) < 1)
        fail("dt must divide dt_forecast evenly");
    if (!(u_max > 0.0)) fail("u_max must be positive");
    if (!(robot_radius > 0.0)) fail("robot_radius must be positive");
    if (forecast_samples < 2) fail("forecast_samples must be >= 2");
    if (cem_iterations < 1) fail("cem_iterations must be >= 1");
    if (cem_elites < 1) fail("cem_elites must be >= 1");
    if (cem_samples < cem_elites) fail("cem_samples must be >= cem_elites");
    if (!(cem_init_std > 0.0)) fail("cem_init_std must be positive");
    if (!(sigma_floor > 0.0)) fail("sigma_floor must be positive");
    require_psd("q", Q);
    require_psd("r_ctrl", R);
    require_psd("q_terminal", Q_terminal);
    if (!(discount_gamma > 0.0 && discount_gamma <= 1.0)) fail("discount_gamma must lie in (0, 1]");
    if (!(episode_duration > 0.0)) fail("episode_duration must be positive");
    if (!(frame_rate > 0.0)) fail("frame_rate must be positive");
    if (!(goal_tol > 0.0)) fail("goal_tol must be positive");
    if (forecast_noise_std < 0.0) fail("forecast_noise_std must be >= 0");
    if (delta_reg < 0.0) fail("delta_reg must be >= 0");
    if (!(d_min_margin > 0.0)) fail("d_min_margin must be positive");
    if (forecaster == ForecasterKind::GoalMixture) {
        if (forecast_goals.empty()) fail("goal_mixture forecaster needs forecast_goals");
        double sum = 0.0;
        for (const auto& g : forecast_goals) {
            if (!(g.weight > 0.0)) fail("forecast_goals weights must be positive");
            sum += g.weight;
        }
        if (std::abs(sum - 1.0) > 1e-9) fail("forecast_goals weights must sum to 1");
    }
    if (soft_penalty_weight < 0.0) fail("soft_penalty_weight must be >= 0");
    if (!(soft_penalty_margin > 0.0)) fail("soft_penalty_margin must be positive");
}

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (tokenize(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("scenario line " + std::to_string(line_no) +
                                     ": expected `key = value`");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    ScenarioConfig config = parse_scenario(ss.str());
    apply_env_overrides(config);
    return config;
}

void apply_env_overrides(ScenarioConfig& config) {
    for (const char* key : kAllKeys) {
        std::string env_name = "DRNAV_";
        for (const char* p = key; *p; ++p)
            env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
        if (const char* value = std::getenv(env_name.c_str())) apply_key(config, key, value);
    }
}

std::string to_string(ForecasterKind kind) {
    switch (kind) {
        case ForecasterKind::ConstantVelocity: return "constant_velocity";
        case ForecasterKind::GoalMixture: return "goal_mixture";
        case ForecasterKind::ReplayOracle: return "replay_oracle";
    }
    return "?";
}

}  // namespace drnav
