#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace speedrun::pipeline {

enum class ExitKind {
    ok,             // exited with status 0
    nonzero_exit,   // exited with a nonzero status
    timeout,        // killed at the runtime cap
    spawn_failure,  // never started (bad binary, fork failure, ...)
};

const char* exit_kind_name(ExitKind kind);

struct CommandSpec {
    std::vector<std::string> argv;            // argv[0] = program
    std::map<std::string, std::string> env;   // complete child environment
    std::optional<std::filesystem::path> workdir;
};

struct ExecutionResult {
    ExitKind exit_kind = ExitKind::spawn_failure;
    int exit_code = -1;       // raw status (signal number if signaled)
    double wall_time_s = 0;   // measured start -> reaped
};

// Runs the command with stdout/stderr redirected to the given files,
// killing the whole process group if it exceeds cap_s seconds.  The child
// sees exactly spec.env (no inherited environment).  Never throws for child
// failures; those are reported through exit_kind.
ExecutionResult run_command(const CommandSpec& spec, const std::filesystem::path& stdout_path,
                            const std::filesystem::path& stderr_path, double cap_s);

}  // namespace speedrun::pipeline
