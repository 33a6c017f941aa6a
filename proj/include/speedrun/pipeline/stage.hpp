#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "speedrun/backend/chat.hpp"
#include "speedrun/pipeline/adapter.hpp"
#include "speedrun/pipeline/prompts.hpp"
#include "speedrun/pipeline/results.hpp"
#include "speedrun/pipeline/templates.hpp"

namespace speedrun::pipeline {

// Fixed task-level inputs shared by every node expansion.
struct TaskContext {
    std::string task_description;
    std::string goal;  // one-liner for the log summarizer
    std::vector<std::string> packages;
    std::string solution_filename;           // e.g. "train_gpt2.py"
    std::vector<std::string> knowledge;      // hint payloads + extra entries; empty = no knowledge
    std::map<std::string, std::string> metric_schema;  // e.g. {"train_time_s","float"}
    double runtime_cap_s = 3600;
    std::string coder_model_id;
    std::string analyst_model_id;
};

// Result of expanding one node.
struct ExpandOutcome {
    ResultsRecord results;
    ExitKind exit_kind = ExitKind::spawn_failure;
    double wall_time_s = 0;
    bool executed = false;  // false when the reply never became a runnable solution
};

struct ExpandInput {
    std::filesystem::path node_dir;         // exists; receives solution + logs + results
    std::filesystem::path parent_solution;  // file to modify
    std::vector<HistoryEntry> history;      // oldest -> newest
};

// Runs one implement -> execute -> analyze cycle:
//   1. renders the coder prompt (knowledge mode iff ctx.knowledge non-empty)
//      and asks the coder backend for an edit;
//   2. applies the edit (diff or full file) and writes the new solution into
//      node_dir; an unusable reply short-circuits to a buggy, unexecuted
//      outcome (the parent's solution is kept as the node's artifact);
//   3. executes via the adapter under the runtime cap;
//   4. summarizes logs and extracts metrics with the analyst backend, the
//      adapter's own measurements taking precedence;
//   5. persists results.json / results.txt.
// has_bugs is decided by execution alone (non-ok exit or unusable edit);
// analyst output never flips it.  Backend outages in step 1 propagate as
// backend::BackendError so the search loop can retry; analyst failures in
// step 4 only degrade the summary.
class StagePipeline {
public:
    StagePipeline(backend::ChatBackend& coder, backend::ChatBackend& analyst,
                  ExecutionAdapter& adapter, TemplateStore templates, TaskContext ctx);

    ExpandOutcome expand(const ExpandInput& input);

    const TaskContext& context() const { return ctx_; }
    const TemplateStore& templates() const { return templates_; }

    // The exact prompt expand() would send for this input; exposed for tests
    // and for scripting mock backends.
    std::string coder_prompt(const ExpandInput& input) const;

private:
    backend::ChatBackend& coder_;
    backend::ChatBackend& analyst_;
    ExecutionAdapter& adapter_;
    TemplateStore templates_;
    TaskContext ctx_;
};

}  // namespace speedrun::pipeline
