#include "speedrun/pipeline/results.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "speedrun/util/io.hpp"
#include "speedrun/util/template.hpp"

namespace speedrun::pipeline {

using nlohmann::json;

std::string render_metrics_json(const MetricMap& metrics) {
    json j = json::object();
    for (const auto& [key, value] : metrics) {
        j[key] = value ? json(*value) : json(nullptr);
    }
    return j.dump();  // nlohmann objects iterate in sorted key order
}

std::string render_results_text(const TemplateStore& templates, const ResultsRecord& record) {
    return util::render_template(templates.get("results_summary"),
                                 {{"hypothesis", record.hypothesis},
                                  {"metrics", render_metrics_json(record.metrics)},
                                  {"has_bugs", record.has_bugs ? "true" : "false"},
                                  {"outcome_summary", record.outcome_summary}});
}

void write_results(const std::filesystem::path& node_dir, const TemplateStore& templates,
                   const ResultsRecord& record) {
    json metrics = json::object();
    for (const auto& [key, value] : record.metrics) {
        metrics[key] = value ? json(*value) : json(nullptr);
    }
    json j{{"hypothesis", record.hypothesis},
           {"metrics", metrics},
           {"has_bugs", record.has_bugs},
           {"outcome_summary", record.outcome_summary}};
    util::write_file(node_dir / "results.json", j.dump(2) + "\n");
    util::write_file(node_dir / "results.txt", render_results_text(templates, record));
}

ResultsRecord read_results(const std::filesystem::path& node_dir) {
    const json j = json::parse(util::read_file(node_dir / "results.json"));
    ResultsRecord record;
    record.hypothesis = j.at("hypothesis").get<std::string>();
    for (const auto& [key, value] : j.at("metrics").items()) {
        record.metrics[key] = value.is_null() ? std::optional<double>()
                                              : std::optional<double>(value.get<double>());
    }
    record.has_bugs = j.at("has_bugs").get<bool>();
    record.outcome_summary = j.at("outcome_summary").get<std::string>();
    return record;
}

}  // namespace speedrun::pipeline
