#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "speedrun/pipeline/results.hpp"

namespace speedrun::search {

enum class ActionKind { seed, improve, debug };
enum class NodeStatus { pending, running, completed, buggy };

const char* action_kind_name(ActionKind kind);
const char* node_status_name(NodeStatus status);
ActionKind parse_action_kind(const std::string& name);
NodeStatus parse_node_status(const std::string& name);

// One candidate solution in the search tree.
struct SolutionNode {
    std::int64_t id = 0;
    std::optional<std::int64_t> parent_id;  // absent iff root
    std::int64_t created_ordinal = 0;       // == id; kept explicit for clarity
    ActionKind action_kind = ActionKind::seed;
    NodeStatus status = NodeStatus::pending;
    std::string hypothesis;
    std::string artifact_ref;  // node directory name within the run dir
    pipeline::MetricMap metrics;
    std::string outcome_summary;
    int debug_depth = 0;  // consecutive debug links above this node

    std::optional<double> train_time_s() const;
    std::optional<double> val_loss() const;

    nlohmann::json to_json() const;
    static SolutionNode from_json(const nlohmann::json& j);
};

enum class NodeClass { Buggy, Improved, Unimproved };

const char* node_class_name(NodeClass c);

// Buggy if the node crashed; Improved if it completed, reached the target
// loss and ran strictly faster than its parent; Unimproved otherwise (which
// covers completed-but-slower runs, missed targets, and children of parents
// with no measured time).
NodeClass classify(const SolutionNode& node, const SolutionNode& parent,
                   double target_val_loss);

enum class ScaffoldKind { Flat, Tree, Forest, AIDE, MultiAIDE };

const char* scaffold_kind_name(ScaffoldKind kind);
ScaffoldKind parse_scaffold_kind(const std::string& name);

// Search-scaffold parameterization: n0 initial root children, branch factor
// n per selected parent, debug probability p_debug, max debug-chain depth
// d_max.  make() normalizes the parameters each variant fixes:
//   Flat      -> n0 = budget_m (n, p_debug, d_max unused)
//   Tree      -> n0 = 1, p_debug = 0, d_max = 0
//   Forest    -> p_debug = 0, d_max = 0
//   AIDE      -> n = 1
//   MultiAIDE -> all four free
struct ScaffoldVariant {
    ScaffoldKind kind = ScaffoldKind::AIDE;
    int n0 = 1;
    int n = 1;
    double p_debug = 0;
    int d_max = 0;

    static ScaffoldVariant make(ScaffoldKind kind, int n0, int n, double p_debug, int d_max,
                                int budget_m);

    nlohmann::json to_json() const;
    static ScaffoldVariant from_json(const nlohmann::json& j);
};

struct SearchConfig {
    ScaffoldVariant variant;
    int budget_m = 20;
    double runtime_cap_s = 3600;
    std::uint64_t rng_seed = 0;
    double target_val_loss = 3.28;

    void validate() const;  // throws std::invalid_argument

    nlohmann::json to_json() const;
    static SearchConfig from_json(const nlohmann::json& j);
};

}  // namespace speedrun::search
