#include "speedrun/pipeline/analysis.hpp"

#include <nlohmann/json.hpp>

#include "speedrun/pipeline/editor.hpp"
#include "speedrun/util/template.hpp"

namespace speedrun::pipeline {

using nlohmann::json;

std::string truncate_log(const std::string& text, std::size_t limit) {
    if (text.size() <= limit) return text;
    const std::size_t keep = limit / 2;
    const std::size_t dropped = text.size() - 2 * keep;
    std::string out = text.substr(0, keep);
    out += "\n... [log truncated: " + std::to_string(dropped) + " bytes elided] ...\n";
    out += text.substr(text.size() - keep);
    return out;
}

std::string render_log_summary_prompt(const TemplateStore& templates, const std::string& goal,
                                      const std::string& stdout_text,
                                      const std::string& stderr_text) {
    return util::render_template(templates.get("stream_summary"),
                                 {{"goal", goal},
                                  {"log_out", truncate_log(stdout_text)},
                                  {"log_err", truncate_log(stderr_text)}});
}

std::string summarize_logs(backend::ChatBackend& analyst, const std::string& model_id,
                           const TemplateStore& templates, const std::string& goal,
                           const std::string& stdout_text, const std::string& stderr_text) {
    backend::ChatRequest req;
    req.model_id = model_id;
    req.user = render_log_summary_prompt(templates, goal, stdout_text, stderr_text);
    try {
        return analyst.chat(req);
    } catch (const std::exception& e) {
        return std::string("analysis unavailable: ") + e.what();
    }
}

std::string render_metric_extraction_prompt(const TemplateStore& templates,
                                            const std::string& logs,
                                            const std::map<std::string, std::string>& schema) {
    json types = json::object();
    for (const auto& [name, type] : schema) types[name] = type;
    return util::render_template(templates.get("metric_extraction"),
                                 {{"logs", truncate_log(logs)},
                                  {"metric_types", types.dump()}});
}

namespace {

// Metric replies are asked to be bare JSON, but models often fence them.
std::string strip_possible_fence(const std::string& reply) {
    try {
        const ParsedResponse parsed = parse_coder_response(reply);
        if (parsed.kind == ParsedResponse::EditKind::full_file) return parsed.payload;
    } catch (const ResponseParseError&) {
        // no fence: fall through to the raw reply
    }
    return reply;
}

}  // namespace

MetricMap extract_metrics(backend::ChatBackend& analyst, const std::string& model_id,
                          const TemplateStore& templates, const std::string& logs,
                          const std::map<std::string, std::string>& schema,
                          std::string* note) {
    if (schema.empty()) {
        throw std::invalid_argument("extract_metrics: schema must be non-empty");
    }
    if (note) note->clear();

    backend::ChatRequest req;
    req.model_id = model_id;
    req.user = render_metric_extraction_prompt(templates, logs, schema);
    std::string reply;
    try {
        reply = analyst.chat(req);
    } catch (const std::exception& e) {
        if (note) *note = std::string("metric extraction failed: ") + e.what();
        return {};
    }

    const json parsed = json::parse(strip_possible_fence(reply), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        if (note) *note = "metric extraction reply was not a JSON dict";
        return {};
    }
    if (parsed.empty()) return {};

    MetricMap out;
    for (const auto& [name, _] : schema) {
        if (parsed.contains(name) && parsed.at(name).is_number()) {
            out[name] = parsed.at(name).get<double>();
        } else {
            out[name] = std::nullopt;
        }
    }
    return out;
}

}  // namespace speedrun::pipeline
