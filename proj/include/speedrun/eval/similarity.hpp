#pragma once

#include <string>
#include <vector>

#include "speedrun/backend/chat.hpp"

namespace speedrun::eval {

// How far an agent solution moved from the previous record toward the next,
// in embedding space:
//   1 - ||e_next - e_agent|| / ||e_next - e_prev||
// 1 means it landed on the next record, 0 means it stayed at the previous
// one.  Requires equal dimensions and e_next != e_prev.
double distance_recovered(const std::vector<double>& e_prev,
                          const std::vector<double>& e_next,
                          const std::vector<double>& e_agent);

// Convenience wrapper: embeds the three code strings with the backend.
double distance_recovered(backend::ChatBackend& backend, const std::string& prev_code,
                          const std::string& next_code, const std::string& agent_code);

// The judge's reply could not be interpreted as a score.
class JudgeParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Asks the backend to rate how close agent_code comes to reproducing the
// changes between human_code and next_human_code.  Returns the
// "reproducibility_score" from the reply's JSON payload, in [0, 1].  Throws
// JudgeParseError when the reply lacks a parseable in-range score.
double judge_score(backend::ChatBackend& backend, const std::string& judge_template,
                   const std::string& human_code, const std::string& next_human_code,
                   const std::string& agent_code, const std::string& model_id);

// Extracts the first JSON object containing key "reproducibility_score" from
// free-form text (judges often wrap the JSON in prose or fences).
double parse_judge_reply(const std::string& reply);

}  // namespace speedrun::eval
