#include <CLI11.hpp>

#include "drnav/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"drnav: distributionally robust chance-constrained MPC for crowd navigation"};
    app.require_subcommand(1);

    drnav::RunSpec spec;
    std::uint64_t seed_flag = 0;
    auto* run = app.add_subcommand("run", "run scenarios and write metrics + trajectory logs");
    run->add_option("--scenario", spec.scenario_paths, "scenario file(s)")->required();
    run->add_option("--tracks", spec.tracks_path, "pedestrian track file (omit for robot-only)");
    run->add_option("--out", spec.out_dir, "output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed_flag, "base seed, overrides the scenario's");
    run->add_option("--epsilon", spec.epsilon_sweep,
                    "collision probability sweep (repeatable)");
    run->add_option("--episodes", spec.episodes, "episodes per (scenario, epsilon)");
    run->add_option("--workers", spec.workers, "parallel episode workers");
    run->add_flag("--force", spec.force, "write into a non-empty output directory");
    run->add_flag("--verbose", spec.verbose, "include moment fields in trajectory logs");

    drnav::VerifyOptions verify_options;
    auto* verify = app.add_subcommand(
        "verify", "run the CVaR-bound distribution checks and the tangency oracle");
    verify->add_option("--seed", verify_options.seed, "oracle seed");
    verify->add_option("--configs", verify_options.num_configs, "random constraint configurations");
    verify->add_option("--samples", verify_options.samples_per_config,
                       "Monte Carlo samples per configuration");
    verify->add_option("--tangency-geometries", verify_options.tangency_geometries,
                       "random geometries for the tangency oracle");
    bool inject_bug = false;
    verify->add_flag("--inject-sigma-bug", inject_bug,
                     "scale Sigma by 0.5 inside the bound (self-test; must fail)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (*seed_opt) spec.seed = seed_flag;
        return drnav::cmd_run(spec);
    }
    if (inject_bug) verify_options.sigma_scale_hook = 0.5;
    return drnav::cmd_verify(verify_options);
}
