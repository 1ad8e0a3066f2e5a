#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lagflow {

struct RunOptions {
    std::string out_dir = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed_override;
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 gate failure, 2 config error, 3 numerical failure
    std::string summary;
};

// parse, dispatch and run one scenario file; deterministic artifacts for a
// given (scenario, seed, thread count)
RunResult run_scenario(const std::string& scenario_path, const RunOptions& opts);

}  // namespace lagflow
