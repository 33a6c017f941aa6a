#include "speedrun/eval/similarity.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "speedrun/util/template.hpp"

namespace speedrun::eval {

namespace {

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

}  // namespace

double distance_recovered(const std::vector<double>& e_prev,
                          const std::vector<double>& e_next,
                          const std::vector<double>& e_agent) {
    if (e_prev.size() != e_next.size() || e_prev.size() != e_agent.size()) {
        throw std::invalid_argument("distance_recovered: embedding dimensions differ");
    }
    if (e_prev.empty()) {
        throw std::invalid_argument("distance_recovered: empty embeddings");
    }
    const double denom = l2_distance(e_next, e_prev);
    if (denom == 0) {
        throw std::invalid_argument(
            "distance_recovered: prev and next embeddings coincide (zero denominator)");
    }
    return 1.0 - l2_distance(e_next, e_agent) / denom;
}

double distance_recovered(backend::ChatBackend& backend, const std::string& prev_code,
                          const std::string& next_code, const std::string& agent_code) {
    return distance_recovered(backend.embed(prev_code), backend.embed(next_code),
                              backend.embed(agent_code));
}

namespace {

// Finds the matching '}' for the '{' at start, honoring JSON string literals.
// Returns npos if unbalanced.
std::size_t match_brace(const std::string& text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;  // skip escaped char
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string::npos;
}

}  // namespace

double parse_judge_reply(const std::string& reply) {
    const std::string key = "reproducibility_score";
    std::size_t key_pos = reply.find(key);
    if (key_pos == std::string::npos) {
        throw JudgeParseError("judge reply has no reproducibility_score");
    }
    // Walk candidate objects that start before the key and try to parse them.
    for (std::size_t open = reply.rfind('{', key_pos); open != std::string::npos;
         open = (open == 0) ? std::string::npos : reply.rfind('{', open - 1)) {
        const std::size_t close = match_brace(reply, open);
        if (close == std::string::npos || close < key_pos) continue;
        nlohmann::json j =
            nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains(key)) continue;
        const auto& v = j.at(key);
        if (!v.is_number()) {
            throw JudgeParseError("reproducibility_score is not numeric");
        }
        const double score = v.get<double>();
        if (score < 0.0 || score > 1.0) {
            throw JudgeParseError("reproducibility_score out of [0,1]: " +
                                  std::to_string(score));
        }
        return score;
    }
    throw JudgeParseError("judge reply has no parseable JSON object with reproducibility_score");
}

double judge_score(backend::ChatBackend& backend, const std::string& judge_template,
                   const std::string& human_code, const std::string& next_human_code,
                   const std::string& agent_code, const std::string& model_id) {
    backend::ChatRequest req;
    req.model_id = model_id;
    req.user = util::render_template(judge_template, {{"human_code", human_code},
                                                      {"next_human_code", next_human_code},
                                                      {"agent_code", agent_code}});
    return parse_judge_reply(backend.chat(req));
}

}  // namespace speedrun::eval
