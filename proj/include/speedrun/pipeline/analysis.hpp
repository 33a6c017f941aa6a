#pragma once

#include <map>
#include <string>

#include "speedrun/backend/chat.hpp"
#include "speedrun/pipeline/results.hpp"
#include "speedrun/pipeline/templates.hpp"

namespace speedrun::pipeline {

inline constexpr std::size_t kLogTruncateBytes = 200 * 1024;

// Caps a log at limit bytes, keeping the head and tail halves and inserting
// an elision marker that states how many bytes were dropped.  Logs at or
// under the limit pass through unchanged.
std::string truncate_log(const std::string& text, std::size_t limit = kLogTruncateBytes);

std::string render_log_summary_prompt(const TemplateStore& templates, const std::string& goal,
                                      const std::string& stdout_text,
                                      const std::string& stderr_text);

// Asks the analyst backend for a short summary of the run's output streams.
// A backend failure degrades to "analysis unavailable: <reason>" rather than
// throwing: summaries are advisory, and their loss must not fail a node.
std::string summarize_logs(backend::ChatBackend& analyst, const std::string& model_id,
                           const TemplateStore& templates, const std::string& goal,
                           const std::string& stdout_text, const std::string& stderr_text);

std::string render_metric_extraction_prompt(const TemplateStore& templates,
                                            const std::string& logs,
                                            const std::map<std::string, std::string>& schema);

// Asks the analyst backend to pull the schema's metrics out of the logs.
// A reply that parses to a non-empty JSON dict yields exactly the schema's
// keys (numbers kept, missing or non-numeric values null, extra keys
// dropped).  An empty-dict reply means "no metrics found" and yields an
// empty map.  Backend failures and unparseable replies also degrade to an
// empty map; when `note` is non-null it receives a short description of what
// went wrong (empty otherwise).  Requires a non-empty schema.
MetricMap extract_metrics(backend::ChatBackend& analyst, const std::string& model_id,
                          const TemplateStore& templates, const std::string& logs,
                          const std::map<std::string, std::string>& schema,
                          std::string* note = nullptr);

}  // namespace speedrun::pipeline
