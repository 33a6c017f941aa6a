#include "speedrun/pipeline/executor.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace speedrun::pipeline {

const char* exit_kind_name(ExitKind kind) {
    switch (kind) {
        case ExitKind::ok: return "ok";
        case ExitKind::nonzero_exit: return "nonzero_exit";
        case ExitKind::timeout: return "timeout";
        case ExitKind::spawn_failure: return "spawn_failure";
    }
    return "unknown";
}

namespace {

int open_log(const std::filesystem::path& path) {
    return ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
}

}  // namespace

ExecutionResult run_command(const CommandSpec& spec, const std::filesystem::path& stdout_path,
                            const std::filesystem::path& stderr_path, double cap_s) {
    ExecutionResult result;
    if (spec.argv.empty() || cap_s <= 0) {
        result.exit_kind = ExitKind::spawn_failure;
        return result;
    }

    // Pipe used only to report exec failure back to the parent: the write end
    // is CLOEXEC, so a successful exec closes it silently, while a failed
    // exec writes errno before exiting.
    int err_pipe[2];
    if (::pipe(err_pipe) != 0) {
        result.exit_kind = ExitKind::spawn_failure;
        return result;
    }
    ::fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

    std::vector<char*> argv;
    argv.reserve(spec.argv.size() + 1);
    for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    std::vector<std::string> env_strings;
    env_strings.reserve(spec.env.size());
    for (const auto& [k, v] : spec.env) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp;
    envp.reserve(env_strings.size() + 1);
    for (auto& e : env_strings) envp.push_back(e.data());
    envp.push_back(nullptr);

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        result.exit_kind = ExitKind::spawn_failure;
        return result;
    }
    if (pid == 0) {
        // Child: own process group so the whole tree can be killed at the cap.
        ::setpgid(0, 0);
        ::close(err_pipe[0]);
        if (spec.workdir && ::chdir(spec.workdir->c_str()) != 0) {
            int e = errno;
            (void)!::write(err_pipe[1], &e, sizeof(e));
            ::_exit(127);
        }
        int out_fd = open_log(stdout_path);
        int err_fd = open_log(stderr_path);
        if (out_fd < 0 || err_fd < 0 || ::dup2(out_fd, STDOUT_FILENO) < 0 ||
            ::dup2(err_fd, STDERR_FILENO) < 0) {
            int e = errno;
            (void)!::write(err_pipe[1], &e, sizeof(e));
            ::_exit(127);
        }
        ::close(out_fd);
        ::close(err_fd);
        ::execve(argv[0], argv.data(), envp.data());
        // execve only returns on failure; try PATH lookup as a fallback.
        environ = envp.data();
        ::execvp(argv[0], argv.data());
        int e = errno;
        (void)!::write(err_pipe[1], &e, sizeof(e));
        ::_exit(127);
    }

    // Parent.
    ::close(err_pipe[1]);
    int exec_errno = 0;
    const ssize_t got = ::read(err_pipe[0], &exec_errno, sizeof(exec_errno));
    ::close(err_pipe[0]);
    if (got > 0) {
        // exec failed; reap and report.
        int status = 0;
        ::waitpid(pid, &status, 0);
        result.exit_kind = ExitKind::spawn_failure;
        result.exit_code = exec_errno;
        result.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    }

    bool timed_out = false;
    int status = 0;
    for (;;) {
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) {  // should not happen; treat as spawn failure
            result.exit_kind = ExitKind::spawn_failure;
            return result;
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed >= cap_s && !timed_out) {
            timed_out = true;
            ::killpg(pid, SIGKILL);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (timed_out) {
        result.exit_kind = ExitKind::timeout;
        result.exit_code = WIFSIGNALED(status) ? WTERMSIG(status) : WEXITSTATUS(status);
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        result.exit_kind = ExitKind::ok;
        result.exit_code = 0;
    } else {
        result.exit_kind = ExitKind::nonzero_exit;
        result.exit_code = WIFSIGNALED(status) ? WTERMSIG(status) : WEXITSTATUS(status);
    }
    return result;
}

}  // namespace speedrun::pipeline
