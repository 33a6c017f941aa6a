#include "speedrun/tasks/task.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "speedrun/util/io.hpp"

namespace speedrun::tasks {

HintSet HintSet::none() {
    HintSet h;
    h.levels = {0};
    return h;
}

HintSet HintSet::make(std::set<int> levels, std::map<int, std::string> payloads) {
    if (levels.empty()) {
        throw std::invalid_argument("hint set: levels must be non-empty (use {0} for no hints)");
    }
    for (int level : levels) {
        if (level < 0 || level > 3) {
            throw std::invalid_argument("hint set: level out of range: " + std::to_string(level));
        }
    }
    if (levels.count(0) && levels.size() > 1) {
        throw std::invalid_argument("hint set: level 0 (no hints) cannot combine with other levels");
    }
    for (int level : levels) {
        if (level >= 1 && !payloads.count(level)) {
            throw std::invalid_argument("hint set: missing payload for level " +
                                        std::to_string(level));
        }
    }
    for (const auto& [level, _] : payloads) {
        if (level == 0) {
            throw std::invalid_argument("hint set: level 0 means no hints and takes no payload");
        }
        if (!levels.count(level)) {
            throw std::invalid_argument("hint set: payload for level " + std::to_string(level) +
                                        " not in the level set");
        }
    }
    HintSet h;
    h.levels = std::move(levels);
    h.payloads = std::move(payloads);
    return h;
}

std::vector<std::string> HintSet::payload_texts() const {
    std::vector<std::string> out;
    for (const auto& [_, text] : payloads) out.push_back(text);  // map is level-ordered
    return out;
}

std::filesystem::path hint_payload_path(const std::filesystem::path& hints_dir,
                                        int record_index, int level) {
    std::ostringstream name;
    name << "record_" << std::setw(2) << std::setfill('0') << record_index << "_level_" << level
         << ".txt";
    return hints_dir / name.str();
}

const char* task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::reproduction: return "reproduction";
        case TaskKind::optimization: return "optimization";
        case TaskKind::cumulative: return "cumulative";
    }
    return "unknown";
}

namespace {

Transition find_transition(const RecordManifest& manifest, int transition) {
    const auto all = transitions(manifest);
    if (transition < 1 || transition > static_cast<int>(all.size())) {
        throw std::invalid_argument("transition index out of range: " +
                                    std::to_string(transition) + " (manifest has " +
                                    std::to_string(all.size()) + " transitions)");
    }
    return all[static_cast<std::size_t>(transition - 1)];
}

RecordTask base_task(const RecordManifest& manifest, int transition, HintSet hints) {
    const Transition t = find_transition(manifest, transition);
    RecordTask task;
    task.transition = transition;
    task.start_artifact = manifest.artifact_path(*t.prev);
    task.next_artifact = manifest.artifact_path(*t.next);
    task.prev_time_ds = t.prev->time_ds;
    task.next_time_ds = t.next->time_ds;
    if (task.prev_time_ds <= task.next_time_ds) {
        throw std::invalid_argument("transition " + std::to_string(transition) +
                                    ": previous record must be slower than the next");
    }
    task.kind = hints.is_none() ? TaskKind::optimization : TaskKind::reproduction;
    task.hints = std::move(hints);
    return task;
}

}  // namespace

RecordTask make_task(const RecordManifest& manifest, int transition, HintSet hints) {
    return base_task(manifest, transition, std::move(hints));
}

RecordTask make_task(const RecordManifest& manifest, int transition,
                     const std::set<int>& levels) {
    if (levels == std::set<int>{0}) {
        return base_task(manifest, transition, HintSet::none());
    }
    const Transition t = find_transition(manifest, transition);
    std::map<int, std::string> payloads;
    for (int level : levels) {
        if (level == 0) continue;  // HintSet::make rejects the mix below
        const auto path = hint_payload_path(manifest.hints_path(), t.next->index, level);
        if (!std::filesystem::is_regular_file(path)) {
            throw std::runtime_error("missing hint payload file: " + path.string());
        }
        payloads[level] = util::read_file(path);
    }
    return base_task(manifest, transition, HintSet::make(levels, std::move(payloads)));
}

RecordTask make_cumulative_task(const std::filesystem::path& prev_agent_solution,
                                const RecordManifest& manifest, int transition, HintSet hints) {
    if (!std::filesystem::is_regular_file(prev_agent_solution)) {
        throw std::runtime_error("missing prior agent solution: " +
                                 prev_agent_solution.string());
    }
    RecordTask task = base_task(manifest, transition, std::move(hints));
    task.start_artifact = prev_agent_solution;
    task.kind = TaskKind::cumulative;
    return task;
}

}  // namespace speedrun::tasks
