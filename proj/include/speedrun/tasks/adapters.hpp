#pragma once

#include <nlohmann/json.hpp>

#include "speedrun/pipeline/adapter.hpp"

namespace speedrun::tasks {

// Runs solutions through simulated_execute().  Wall time is the simulated
// training time (clamped to the cap, which also flips the outcome to a
// timeout), so runs are instant and fully deterministic.
class SimulatedAdapter : public pipeline::ExecutionAdapter {
public:
    Execution execute(const std::filesystem::path& solution_path,
                      const std::filesystem::path& node_dir, double cap_s) override;
};

// Runs solutions as real subprocesses.
struct CommandConfig {
    // argv template for the run; "{solution}" expands to the solution path.
    std::vector<std::string> argv;
    // Environment variable NAMES forwarded from the parent (values are read
    // at spawn time and never persisted anywhere).
    std::vector<std::string> env_passthrough;
    std::optional<std::string> workdir;

    static CommandConfig from_json(const nlohmann::json& j);
};

class CommandAdapter : public pipeline::ExecutionAdapter {
public:
    explicit CommandAdapter(CommandConfig config);

    Execution execute(const std::filesystem::path& solution_path,
                      const std::filesystem::path& node_dir, double cap_s) override;

private:
    CommandConfig config_;
};

}  // namespace speedrun::tasks
