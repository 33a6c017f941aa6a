#include "speedrun/pipeline/prompts.hpp"

#include <sstream>

#include "speedrun/util/template.hpp"

namespace speedrun::pipeline {

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

std::string render_history(const TemplateStore& templates,
                           const std::vector<HistoryEntry>& entries) {
    std::string out = "<version_log>\n";
    for (const HistoryEntry& e : entries) {
        out += util::render_template(
            templates.get("history_entry"),
            {{"version", std::to_string(e.version)},
             {"parent_version",
              e.parent_version ? std::to_string(*e.parent_version) : std::string("None")},
             {"hypothesis", e.hypothesis},
             {"metrics", render_metrics_json(e.metrics)},
             {"has_bugs", e.has_bugs ? "true" : "false"},
             {"outcome_summary", e.outcome_summary}});
    }
    out += "</version_log>";
    return out;
}

std::string render_knowledge(const TemplateStore& templates,
                             const std::vector<std::string>& entries) {
    std::string out = "<knowledge>\n";
    for (const std::string& entry : entries) {
        out += util::render_template(templates.get("knowledge_entry"),
                                     {{"knowledge_entry", entry}});
    }
    out += "</knowledge>";
    return out;
}

std::string render_coder_prompt(const TemplateStore& templates, const PromptBundle& bundle) {
    const bool with_knowledge = bundle.mode == KnowledgeMode::with_knowledge;
    std::map<std::string, std::string> values{
        {"fnames", join(bundle.file_names, ", ")},
        {"code", bundle.code},
        {"task_description", bundle.task_description},
        {"packages", join(bundle.packages, ", ")},
        {"history", bundle.history},
    };
    if (with_knowledge) {
        if (!bundle.knowledge) {
            throw util::MissingPlaceholder("knowledge");
        }
        values["knowledge"] = *bundle.knowledge;
    }
    return util::render_template(
        templates.get(with_knowledge ? "coder_with_knowledge" : "coder_no_knowledge"), values);
}

}  // namespace speedrun::pipeline
