#pragma once

#include <filesystem>
#include <optional>

#include "speedrun/pipeline/executor.hpp"
#include "speedrun/pipeline/results.hpp"

namespace speedrun::pipeline {

// How a candidate solution gets run and measured.  Implementations redirect
// the run's stdout/stderr into node_dir/stdout.log and node_dir/stderr.log.
class ExecutionAdapter {
public:
    struct Execution {
        ExitKind exit_kind = ExitKind::spawn_failure;
        double wall_time_s = 0;
        // Ground-truth metrics, when the adapter can measure them itself.
        // When present they take precedence over LLM extraction from logs.
        std::optional<MetricMap> metrics;
    };

    virtual ~ExecutionAdapter() = default;

    // Runs the solution file, enforcing the runtime cap (seconds).
    virtual Execution execute(const std::filesystem::path& solution_path,
                              const std::filesystem::path& node_dir, double cap_s) = 0;
};

}  // namespace speedrun::pipeline
