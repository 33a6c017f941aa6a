#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "speedrun/backend/chat.hpp"
#include "speedrun/eval/aggregate.hpp"
#include "speedrun/pipeline/adapter.hpp"
#include "speedrun/pipeline/templates.hpp"
#include "speedrun/search/tree.hpp"
#include "speedrun/tasks/task.hpp"

namespace speedrun::cli {

// Everything needed to execute one search run against one task.
struct RunSpec {
    tasks::RecordTask task;
    search::SearchConfig config;
    std::filesystem::path run_dir;
    std::string model_label;  // recorded in the run record
    std::string solution_filename;
    std::string task_description;
    std::string goal;
    std::vector<std::string> packages;
    std::vector<std::string> extra_knowledge;  // appended after hint payloads
    bool compute_similarity = false;
};

struct RunOutcome {
    std::int64_t best_id = 0;
    std::optional<double> best_time_s;  // absent when no node beat the baseline
    std::filesystem::path best_artifact;
    double fsr = 0;
    bool truncated = false;
    eval::RunRecord record;
};

// Runs (or resumes) a search and writes run_record.json into the run dir.
// `embedder` may be null; similarity scores are computed only when requested
// and an embedder is available.  The analyst backend doubles as the judge.
RunOutcome run_search(const RunSpec& spec, backend::ChatBackend& coder,
                      backend::ChatBackend& analyst, backend::ChatBackend* embedder,
                      pipeline::ExecutionAdapter& adapter,
                      const pipeline::TemplateStore& templates);

// Chains transitions first..last cumulatively: each link starts from the
// previous link's best artifact, while FSR still scores against the
// ground-truth record times.  Per-link run dirs land under out_root.
struct ChainLink {
    int transition = 0;
    double fsr = 0;
    std::optional<double> best_time_s;
    std::filesystem::path artifact;  // what seeds the next link
};

struct ChainSpec {
    std::filesystem::path manifest_path;
    int first_transition = 1;
    int last_transition = 1;
    std::set<int> hint_levels{0};
    search::SearchConfig config;
    std::filesystem::path out_root;
    std::string model_label;
    std::string solution_filename;
    std::string task_description;
    std::string goal;
    std::vector<std::string> packages;
};

std::vector<ChainLink> run_chain(const ChainSpec& spec, backend::ChatBackend& coder,
                                 backend::ChatBackend& analyst,
                                 pipeline::ExecutionAdapter& adapter,
                                 const pipeline::TemplateStore& templates);

}  // namespace speedrun::cli
