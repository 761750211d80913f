#include "drnav/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "drnav/sim.hpp"

namespace drnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t episode_seed(std::uint64_t base, int episode_index) {
    return mix_seed(base ^ mix_seed(static_cast<std::uint64_t>(episode_index)));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt_or_none(double v) { return std::isfinite(v) ? fmt(v) : "none"; }

std::string scenario_stem(const std::string& path) { return fs::path(path).stem().string(); }

struct Job {
    ScenarioConfig config;
    std::string group;  // "<scenario>-eps<val>"
    std::string id;     // "<group>-ep<i>"
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int cmd_run(const RunSpec& spec) {
    try {
        if (spec.scenario_paths.empty()) throw std::runtime_error("no scenario file given");
        for (const auto& p : spec.scenario_paths)
            if (!fs::exists(p)) throw std::runtime_error("scenario file not found: " + p);
        if (!spec.tracks_path.empty() && !fs::exists(spec.tracks_path))
            throw std::runtime_error("track file not found: " + spec.tracks_path);
        if (spec.out_dir.empty()) throw std::runtime_error("no output directory given");
        for (double e : spec.epsilon_sweep)
            if (!(e > 0.0 && e < 1.0))
                throw std::runtime_error("epsilon sweep value out of (0, 1): " + fmt(e));
        if (spec.episodes < 1) throw std::runtime_error("episodes must be >= 1");
        if (spec.workers < 1) throw std::runtime_error("workers must be >= 1");

        if (fs::exists(spec.out_dir) && !fs::is_empty(spec.out_dir) && !spec.force)
            throw std::runtime_error("output directory " + spec.out_dir +
                                     " is not empty (use --force to overwrite)");
        fs::create_directories(fs::path(spec.out_dir) / "episodes");

        std::vector<Job> jobs;
        std::vector<std::string> group_order;
        for (const auto& path : spec.scenario_paths) {
            ScenarioConfig base = load_scenario_file(path);
            if (spec.seed) base.rng_seed = *spec.seed;
            std::vector<double> sweep = spec.epsilon_sweep;
            if (sweep.empty()) sweep.push_back(base.epsilon);
            for (double eps : sweep) {
                std::string group = scenario_stem(path) + "-eps" + fmt(eps);
                group_order.push_back(group);
                for (int i = 0; i < spec.episodes; ++i) {
                    Job job;
                    job.config = base;
                    job.config.epsilon = eps;
                    job.config.rng_seed = episode_seed(base.rng_seed, i);
                    job.config.validate();
                    job.group = group;
                    job.id = group + "-ep" + std::to_string(i);
                    jobs.push_back(std::move(job));
                }
            }
        }

        std::vector<PedestrianTrack> tracks;
        if (!spec.tracks_path.empty()) {
            // The frame rate is declared per scenario; all scenarios sharing a
            // track file must agree on it.
            double frame_rate = jobs.front().config.frame_rate;
            for (const auto& job : jobs)
                if (job.config.frame_rate != frame_rate)
                    throw std::runtime_error("scenarios disagree on frame_rate");
            tracks = parse_tracks(read_file(spec.tracks_path), frame_rate);
        }

        std::vector<ScenarioConfig> scenarios;
        scenarios.reserve(jobs.size());
        for (const auto& job : jobs) scenarios.push_back(job.config);

        EpisodeOptions options;
        options.verbose_log = spec.verbose;
        options.eval_threads =
            spec.workers > 1 ? 1
                             : std::max(1u, std::thread::hardware_concurrency());
        BatchResult batch = run_batch(scenarios, tracks, spec.workers, options);

        // Per-episode trajectory logs.
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            std::ofstream log(fs::path(spec.out_dir) / "episodes" / (jobs[i].id + ".jsonl"));
            log << batch.episodes[i].trajectory_log;
        }

        // metrics.tsv — reproducible from (inputs, seed); wall-clock timings
        // go to timings.tsv, the one output excluded from that contract.
        {
            std::ofstream out(fs::path(spec.out_dir) / "metrics.tsv");
            out << "episode\tepsilon\tseed\tsuccess\treached_goal\tcollision_events"
                   "\tcollision_steps\tcollision_norm\tmin_distance\tpositional_cost"
                   "\tepisode_length\tinitial_state_collision\tfailed\terror\n";
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                const MetricsRecord& m = batch.episodes[i].metrics;
                out << jobs[i].id << '\t' << fmt(m.epsilon) << '\t' << m.seed << '\t'
                    << (m.success ? 1 : 0) << '\t' << (m.reached_goal ? 1 : 0) << '\t'
                    << m.collision_events << '\t' << m.collision_steps << '\t'
                    << fmt(m.collision_norm) << '\t' << fmt_or_none(m.min_distance) << '\t'
                    << fmt(m.positional_cost) << '\t' << fmt(m.episode_length) << '\t'
                    << (m.initial_state_collision ? 1 : 0) << '\t' << (m.failed ? 1 : 0) << '\t'
                    << m.error << '\n';
            }
        }
        {
            std::ofstream out(fs::path(spec.out_dir) / "timings.tsv");
            out << "episode\tmean_step_wall_time_ms\n";
            for (std::size_t i = 0; i < jobs.size(); ++i)
                out << jobs[i].id << '\t' << fmt(batch.episodes[i].metrics.mean_step_wall_time_ms)
                    << '\n';
        }

        // aggregate.tsv + summary.json, one row per (scenario, epsilon).
        json summary;
        summary["episodes"] = json::array();
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const MetricsRecord& m = batch.episodes[i].metrics;
            json e;
            e["id"] = jobs[i].id;
            e["group"] = jobs[i].group;
            e["epsilon"] = m.epsilon;
            e["seed"] = m.seed;
            e["success"] = m.success;
            e["reached_goal"] = m.reached_goal;
            e["collision_events"] = m.collision_events;
            e["collision_steps"] = m.collision_steps;
            e["collision_norm"] = m.collision_norm;
            e["min_distance"] = m.min_distance;  // inf serializes as null
            e["positional_cost"] = m.positional_cost;
            e["episode_length"] = m.episode_length;
            e["initial_state_collision"] = m.initial_state_collision;
            e["failed"] = m.failed;
            if (!m.error.empty()) e["error"] = m.error;
            summary["episodes"].push_back(std::move(e));
        }
        summary["groups"] = json::array();
        std::ofstream agg_out(fs::path(spec.out_dir) / "aggregate.tsv");
        agg_out << "group\tepisodes\tincluded\tfailed\tinitial_collisions\tsuccess_rate"
                   "\tcollision_norm_mean\tcollision_norm_std\tmin_distance_mean"
                   "\tmin_distance_std\tpositional_cost_mean\tpositional_cost_std\n";
        bool any_failed = false;
        for (const auto& group : group_order) {
            std::vector<MetricsRecord> records;
            for (std::size_t i = 0; i < jobs.size(); ++i)
                if (jobs[i].group == group) records.push_back(batch.episodes[i].metrics);
            Aggregate agg = aggregate_metrics(records);
            any_failed = any_failed || agg.episodes_failed > 0;
            agg_out << group << '\t' << agg.episodes_total << '\t' << agg.episodes_included << '\t'
                    << agg.episodes_failed << '\t' << agg.initial_state_collisions << '\t'
                    << fmt(agg.success_rate) << '\t' << fmt(agg.collision_norm.mean) << '\t'
                    << fmt(agg.collision_norm.stddev) << '\t' << fmt(agg.min_distance.mean) << '\t'
                    << fmt(agg.min_distance.stddev) << '\t' << fmt(agg.positional_cost.mean)
                    << '\t' << fmt(agg.positional_cost.stddev) << '\n';

            json g;
            g["group"] = group;
            g["episodes"] = agg.episodes_total;
            g["included"] = agg.episodes_included;
            g["failed"] = agg.episodes_failed;
            g["initial_collisions"] = agg.initial_state_collisions;
            g["success_rate"] = agg.success_rate;
            g["collision_norm"] = {{"mean", agg.collision_norm.mean},
                                   {"std", agg.collision_norm.stddev}};
            g["min_distance"] = {{"mean", agg.min_distance.mean},
                                 {"std", agg.min_distance.stddev},
                                 {"count", agg.min_distance.count}};
            g["positional_cost"] = {{"mean", agg.positional_cost.mean},
                                    {"std", agg.positional_cost.stddev}};
            summary["groups"].push_back(g);
        }
        std::ofstream(fs::path(spec.out_dir) / "summary.json") << summary.dump(2) << '\n';

        if (any_failed) {
            std::cerr << "drnav: some episodes failed; see metrics.tsv\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "drnav run: " << ex.what() << '\n';
        return 2;
    }
}

int cmd_verify(const VerifyOptions& options) {
    std::vector<PropertyResult> results = run_risk_verification(options);
    auto tangency = run_tangency_verification(options.seed, options.tangency_geometries);
    results.insert(results.end(), tangency.begin(), tangency.end());
    auto mono = run_monotonicity_verification(options.seed);
    results.insert(results.end(), mono.begin(), mono.end());

    bool all_pass = true;
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
    }
    std::cout << (all_pass ? "verification OK" : "verification FAILED") << '\n';
    return all_pass ? 0 : 1;
}

}  // namespace drnav
