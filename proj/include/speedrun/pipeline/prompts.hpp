#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "speedrun/pipeline/results.hpp"
#include "speedrun/pipeline/templates.hpp"

namespace speedrun::pipeline {

// One prior attempt, as shown to the coder inside the version log.
struct HistoryEntry {
    std::int64_t version = 0;
    std::optional<std::int64_t> parent_version;  // nullopt renders as "None"
    std::string hypothesis;
    MetricMap metrics;
    bool has_bugs = false;
    std::string outcome_summary;
};

enum class KnowledgeMode { with_knowledge, no_knowledge };

// Everything the coder prompt needs.  mode=no_knowledge implies knowledge is
// absent; the rendered prompt is a pure function of this struct.
struct PromptBundle {
    std::string task_description;
    std::string code;                      // full current solution text
    std::vector<std::string> file_names;
    std::string history;                   // rendered version log
    std::optional<std::string> knowledge;  // rendered knowledge list
    std::vector<std::string> packages;
    KnowledgeMode mode = KnowledgeMode::no_knowledge;
};

// <version_log> shell with one <info> block per entry, oldest first.
std::string render_history(const TemplateStore& templates,
                           const std::vector<HistoryEntry>& entries);

// <knowledge> shell with one <li> per entry, in the order given.
std::string render_knowledge(const TemplateStore& templates,
                             const std::vector<std::string>& entries);

// Instantiates the coder template for the bundle's mode.  Throws
// util::MissingPlaceholder if the bundle leaves a placeholder unfilled
// (e.g. knowledge absent in with_knowledge mode).
std::string render_coder_prompt(const TemplateStore& templates, const PromptBundle& bundle);

}  // namespace speedrun::pipeline
