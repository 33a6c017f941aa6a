#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "speedrun/pipeline/templates.hpp"

namespace speedrun::pipeline {

// Extracted metric values; a null value means "requested but not found".
using MetricMap = std::map<std::string, std::optional<double>>;

// The per-node analysis record, persisted as results.json next to the
// rendered results.txt.
struct ResultsRecord {
    std::string hypothesis;
    MetricMap metrics;
    bool has_bugs = false;
    std::string outcome_summary;
};

// Compact single-line JSON for the metrics dict ({"a":1.0,"b":null}), with
// keys in sorted order so renders are stable.
std::string render_metrics_json(const MetricMap& metrics);

// Fills the results template (Hypothesis / Results / Has bugs / Outcome
// summary four-field layout).
std::string render_results_text(const TemplateStore& templates, const ResultsRecord& record);

// Writes results.json + results.txt into node_dir.
void write_results(const std::filesystem::path& node_dir, const TemplateStore& templates,
                   const ResultsRecord& record);

// Reads results.json back; throws on missing/malformed file.
ResultsRecord read_results(const std::filesystem::path& node_dir);

}  // namespace speedrun::pipeline
