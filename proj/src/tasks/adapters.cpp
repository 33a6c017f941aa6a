#include "speedrun/tasks/adapters.hpp"

#include <cstdlib>
#include <stdexcept>

#include "speedrun/tasks/simulator.hpp"
#include "speedrun/util/io.hpp"

namespace speedrun::tasks {

pipeline::ExecutionAdapter::Execution SimulatedAdapter::execute(
    const std::filesystem::path& solution_path, const std::filesystem::path& node_dir,
    double cap_s) {
    const SimOutcome sim = simulated_execute(util::read_file(solution_path));
    util::write_file(node_dir / "stdout.log", sim.stdout_text);
    util::write_file(node_dir / "stderr.log", sim.stderr_text);

    Execution exec;
    if (sim.exit_code == 0 && sim.train_time_s > cap_s) {
        // The simulated run would have blown the budget; report it like the
        // subprocess executor does: killed at the cap, no metrics.
        exec.exit_kind = pipeline::ExitKind::timeout;
        exec.wall_time_s = cap_s;
        return exec;
    }
    exec.exit_kind =
        sim.exit_code == 0 ? pipeline::ExitKind::ok : pipeline::ExitKind::nonzero_exit;
    exec.wall_time_s = sim.exit_code == 0 ? sim.train_time_s : 0.0;
    if (sim.exit_code == 0) {
        pipeline::MetricMap metrics;
        metrics["train_time_s"] = sim.train_time_s;
        metrics["val_loss"] = sim.val_loss;
        exec.metrics = metrics;
    }
    return exec;
}

CommandConfig CommandConfig::from_json(const nlohmann::json& j) {
    CommandConfig c;
    if (!j.contains("argv") || !j.at("argv").is_array() || j.at("argv").empty()) {
        throw std::runtime_error("command adapter config: argv (non-empty array) is required");
    }
    c.argv = j.at("argv").get<std::vector<std::string>>();
    if (j.contains("env_passthrough")) {
        c.env_passthrough = j.at("env_passthrough").get<std::vector<std::string>>();
    }
    if (j.contains("workdir")) c.workdir = j.at("workdir").get<std::string>();
    return c;
}

CommandAdapter::CommandAdapter(CommandConfig config) : config_(std::move(config)) {}

pipeline::ExecutionAdapter::Execution CommandAdapter::execute(
    const std::filesystem::path& solution_path, const std::filesystem::path& node_dir,
    double cap_s) {
    pipeline::CommandSpec spec;
    for (const auto& arg : config_.argv) {
        if (arg == "{solution}") {
            spec.argv.push_back(solution_path.string());
        } else {
            spec.argv.push_back(arg);
        }
    }
    for (const auto& name : config_.env_passthrough) {
        if (const char* v = std::getenv(name.c_str())) {
            spec.env[name] = v;
        }
    }
    if (config_.workdir) spec.workdir = *config_.workdir;

    const pipeline::ExecutionResult result = pipeline::run_command(
        spec, node_dir / "stdout.log", node_dir / "stderr.log", cap_s);

    Execution exec;
    exec.exit_kind = result.exit_kind;
    exec.wall_time_s = result.wall_time_s;
    return exec;
}

}  // namespace speedrun::tasks
