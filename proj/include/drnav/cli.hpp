#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drnav/verification.hpp"

namespace drnav {

struct RunSpec {
    std::vector<std::string> scenario_paths;
    std::string tracks_path;  // empty = robot-only
    std::string out_dir;
    std::optional<std::uint64_t> seed;   // overrides the scenario seed
    std::vector<double> epsilon_sweep;   // empty = the scenario's own epsilon
    int episodes = 1;
    int workers = 1;
    bool force = false;    // allow writing into a non-empty output directory
    bool verbose = false;
};

// Runs every (scenario, epsilon, episode) combination and writes
//   <out>/metrics.tsv        one row per episode
//   <out>/aggregate.tsv      one row per (scenario, epsilon)
//   <out>/summary.json       the same, structured
//   <out>/episodes/<id>.jsonl trajectory logs
// Returns 0 on full completion, non-zero when any episode failed or the spec
// is invalid.
int cmd_run(const RunSpec& spec);

// Runs the risk-module distribution-family checks and the tangency oracle,
// printing one pass/fail line per property. Returns 0 iff all pass.
int cmd_verify(const VerifyOptions& options);

}  // namespace drnav
