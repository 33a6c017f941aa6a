#pragma once

#include <map>
#include <set>
#include <string>

#include "speedrun/pipeline/stage.hpp"
#include "speedrun/tasks/manifest.hpp"

namespace speedrun::tasks {

// Which hints a task carries.  Level 0 means "no hints" and is exclusive;
// every level >= 1 in the set must have its payload text loaded.
struct HintSet {
    std::set<int> levels;
    std::map<int, std::string> payloads;

    static HintSet none();  // {0}
    // Builds from levels + payloads, enforcing the invariants above.
    static HintSet make(std::set<int> levels, std::map<int, std::string> payloads);

    bool is_none() const { return levels == std::set<int>{0}; }
    // Payload texts in ascending level order (empty for the no-hint set).
    std::vector<std::string> payload_texts() const;
};

// Payload file for (record, level) under a hints directory:
//   <hints_dir>/record_<NN>_level_<L>.txt  (NN = destination record index)
std::filesystem::path hint_payload_path(const std::filesystem::path& hints_dir,
                                        int record_index, int level);

enum class TaskKind { reproduction, optimization, cumulative };

const char* task_kind_name(TaskKind kind);

// One benchmark unit: start from the previous record's solution and try to
// reach (or beat) the next record's runtime.
struct RecordTask {
    int transition = 0;                    // 1-based transition index
    std::filesystem::path start_artifact;  // what seeds the search root
    std::filesystem::path next_artifact;   // ground-truth destination solution
    std::int64_t prev_time_ds = 0;         // ground-truth t_i
    std::int64_t next_time_ds = 0;         // ground-truth t_{i+1}
    HintSet hints;
    double target_val_loss = 3.28;
    TaskKind kind = TaskKind::optimization;

    double prev_time_s() const { return seconds(prev_time_ds); }
    double next_time_s() const { return seconds(next_time_ds); }
};

// Builds the task for transition i (1-based, over non-excluded pairs).
// The overload taking levels loads payloads from the manifest's hints_dir
// (missing payload file → error).  kind is reproduction when hints are
// present, optimization otherwise.
RecordTask make_task(const RecordManifest& manifest, int transition, HintSet hints);
RecordTask make_task(const RecordManifest& manifest, int transition,
                     const std::set<int>& levels);

// Same as make_task but seeded with an earlier search's best solution
// instead of the human record; t_i / t_{i+1} stay ground truth so FSR is
// comparable across the chain.  kind = cumulative.
RecordTask make_cumulative_task(const std::filesystem::path& prev_agent_solution,
                                const RecordManifest& manifest, int transition, HintSet hints);

}  // namespace speedrun::tasks
