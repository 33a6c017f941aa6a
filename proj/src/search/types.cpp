#include "speedrun/search/types.hpp"

#include <stdexcept>

namespace speedrun::search {

using nlohmann::json;

const char* action_kind_name(ActionKind kind) {
    switch (kind) {
        case ActionKind::seed: return "seed";
        case ActionKind::improve: return "improve";
        case ActionKind::debug: return "debug";
    }
    return "unknown";
}

const char* node_status_name(NodeStatus status) {
    switch (status) {
        case NodeStatus::pending: return "pending";
        case NodeStatus::running: return "running";
        case NodeStatus::completed: return "completed";
        case NodeStatus::buggy: return "buggy";
    }
    return "unknown";
}

ActionKind parse_action_kind(const std::string& name) {
    if (name == "seed") return ActionKind::seed;
    if (name == "improve") return ActionKind::improve;
    if (name == "debug") return ActionKind::debug;
    throw std::invalid_argument("unknown action kind: " + name);
}

NodeStatus parse_node_status(const std::string& name) {
    if (name == "pending") return NodeStatus::pending;
    if (name == "running") return NodeStatus::running;
    if (name == "completed") return NodeStatus::completed;
    if (name == "buggy") return NodeStatus::buggy;
    throw std::invalid_argument("unknown node status: " + name);
}

namespace {

std::optional<double> metric(const pipeline::MetricMap& metrics, const char* name) {
    auto it = metrics.find(name);
    if (it == metrics.end()) return std::nullopt;
    return it->second;
}

}  // namespace

std::optional<double> SolutionNode::train_time_s() const { return metric(metrics, "train_time_s"); }
std::optional<double> SolutionNode::val_loss() const { return metric(metrics, "val_loss"); }

json SolutionNode::to_json() const {
    json metrics_json = json::object();
    for (const auto& [key, value] : metrics) {
        metrics_json[key] = value ? json(*value) : json(nullptr);
    }
    json j{{"id", id},
           {"parent", parent_id ? json(*parent_id) : json(nullptr)},
           {"ordinal", created_ordinal},
           {"action", action_kind_name(action_kind)},
           {"status", node_status_name(status)},
           {"hypothesis", hypothesis},
           {"artifact", artifact_ref},
           {"metrics", metrics_json},
           {"outcome_summary", outcome_summary},
           {"debug_depth", debug_depth}};
    return j;
}

SolutionNode SolutionNode::from_json(const json& j) {
    SolutionNode n;
    n.id = j.at("id").get<std::int64_t>();
    if (!j.at("parent").is_null()) n.parent_id = j.at("parent").get<std::int64_t>();
    n.created_ordinal = j.at("ordinal").get<std::int64_t>();
    n.action_kind = parse_action_kind(j.at("action").get<std::string>());
    n.status = parse_node_status(j.at("status").get<std::string>());
    n.hypothesis = j.at("hypothesis").get<std::string>();
    n.artifact_ref = j.at("artifact").get<std::string>();
    for (const auto& [key, value] : j.at("metrics").items()) {
        n.metrics[key] = value.is_null() ? std::optional<double>()
                                         : std::optional<double>(value.get<double>());
    }
    n.outcome_summary = j.at("outcome_summary").get<std::string>();
    n.debug_depth = j.at("debug_depth").get<int>();
    return n;
}

const char* node_class_name(NodeClass c) {
    switch (c) {
        case NodeClass::Buggy: return "buggy";
        case NodeClass::Improved: return "improved";
        case NodeClass::Unimproved: return "unimproved";
    }
    return "unknown";
}

NodeClass classify(const SolutionNode& node, const SolutionNode& parent,
                   double target_val_loss) {
    if (node.status == NodeStatus::pending || node.status == NodeStatus::running) {
        throw std::invalid_argument("classify: node has not finished");
    }
    if (node.status == NodeStatus::buggy) return NodeClass::Buggy;
    const auto time = node.train_time_s();
    const auto loss = node.val_loss();
    const auto parent_time = parent.train_time_s();
    if (time && loss && parent_time && *loss <= target_val_loss && *time < *parent_time) {
        return NodeClass::Improved;
    }
    return NodeClass::Unimproved;
}

const char* scaffold_kind_name(ScaffoldKind kind) {
    switch (kind) {
        case ScaffoldKind::Flat: return "Flat";
        case ScaffoldKind::Tree: return "Tree";
        case ScaffoldKind::Forest: return "Forest";
        case ScaffoldKind::AIDE: return "AIDE";
        case ScaffoldKind::MultiAIDE: return "MultiAIDE";
    }
    return "unknown";
}

ScaffoldKind parse_scaffold_kind(const std::string& name) {
    if (name == "Flat") return ScaffoldKind::Flat;
    if (name == "Tree") return ScaffoldKind::Tree;
    if (name == "Forest") return ScaffoldKind::Forest;
    if (name == "AIDE") return ScaffoldKind::AIDE;
    if (name == "MultiAIDE" || name == "Multi-AIDE") return ScaffoldKind::MultiAIDE;
    throw std::invalid_argument("unknown scaffold kind: " + name +
                                " (expected Flat, Tree, Forest, AIDE or MultiAIDE)");
}

ScaffoldVariant ScaffoldVariant::make(ScaffoldKind kind, int n0, int n, double p_debug,
                                      int d_max, int budget_m) {
    ScaffoldVariant v;
    v.kind = kind;
    v.n0 = n0;
    v.n = n;
    v.p_debug = p_debug;
    v.d_max = d_max;
    switch (kind) {
        case ScaffoldKind::Flat:
            if (budget_m < 1) {
                throw std::invalid_argument("Flat scaffold needs a positive budget");
            }
            v.n0 = budget_m;
            v.n = 1;
            v.p_debug = 0;
            v.d_max = 0;
            break;
        case ScaffoldKind::Tree:
            v.n0 = 1;
            v.p_debug = 0;
            v.d_max = 0;
            break;
        case ScaffoldKind::Forest:
            v.p_debug = 0;
            v.d_max = 0;
            break;
        case ScaffoldKind::AIDE:
            v.n = 1;
            break;
        case ScaffoldKind::MultiAIDE:
            break;
    }
    if (v.n0 < 1) throw std::invalid_argument("scaffold: n0 must be >= 1");
    if (v.n < 1) throw std::invalid_argument("scaffold: n must be >= 1");
    if (v.d_max < 0) throw std::invalid_argument("scaffold: d_max must be >= 0");
    if (v.p_debug < 0 || v.p_debug > 1) {
        throw std::invalid_argument("scaffold: p_debug must be in [0,1]");
    }
    return v;
}

json ScaffoldVariant::to_json() const {
    return json{{"kind", scaffold_kind_name(kind)},
                {"n0", n0},
                {"n", n},
                {"p_debug", p_debug},
                {"d_max", d_max}};
}

ScaffoldVariant ScaffoldVariant::from_json(const json& j) {
    ScaffoldVariant v;
    v.kind = parse_scaffold_kind(j.at("kind").get<std::string>());
    v.n0 = j.at("n0").get<int>();
    v.n = j.at("n").get<int>();
    v.p_debug = j.at("p_debug").get<double>();
    v.d_max = j.at("d_max").get<int>();
    return v;
}

void SearchConfig::validate() const {
    if (budget_m < variant.n0) {
        throw std::invalid_argument("search config: budget_m (" + std::to_string(budget_m) +
                                    ") must cover the initial branch n0 (" +
                                    std::to_string(variant.n0) + ")");
    }
    if (!(runtime_cap_s > 0)) {
        throw std::invalid_argument("search config: runtime_cap_s must be positive");
    }
    if (!(target_val_loss > 0)) {
        throw std::invalid_argument("search config: target_val_loss must be positive");
    }
}

json SearchConfig::to_json() const {
    return json{{"variant", variant.to_json()},
                {"budget_m", budget_m},
                {"runtime_cap_s", runtime_cap_s},
                {"rng_seed", rng_seed},
                {"target_val_loss", target_val_loss}};
}

SearchConfig SearchConfig::from_json(const json& j) {
    SearchConfig c;
    c.variant = ScaffoldVariant::from_json(j.at("variant"));
    c.budget_m = j.at("budget_m").get<int>();
    c.runtime_cap_s = j.at("runtime_cap_s").get<double>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.target_val_loss = j.at("target_val_loss").get<double>();
    c.validate();
    return c;
}

}  // namespace speedrun::search
