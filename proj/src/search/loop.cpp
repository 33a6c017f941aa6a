#include <algorithm>

#include "speedrun/search/tree.hpp"
#include "speedrun/util/io.hpp"

namespace speedrun::search {

namespace {

std::vector<std::int64_t> eligible_buggy_nodes(const SearchTree& tree) {
    std::vector<std::int64_t> out;
    const int d_max = tree.config().variant.d_max;
    for (std::int64_t id = 0; id < static_cast<std::int64_t>(tree.size()); ++id) {
        const SolutionNode n = tree.node(id);
        if (n.status == NodeStatus::buggy && n.debug_depth < d_max) out.push_back(id);
    }
    return out;
}

}  // namespace

Action select_action(const SearchTree& tree, util::Rng& rng) {
    const SearchConfig& config = tree.config();
    if (tree.expansions_used() >= config.budget_m) throw BudgetExhausted();

    if (static_cast<int>(tree.children_of(0).size()) < config.variant.n0) {
        return Action{Action::Type::SeedRoot, 0};
    }
    const double u = rng.unit();
    if (u < config.variant.p_debug) {
        const auto buggy = eligible_buggy_nodes(tree);
        if (!buggy.empty()) {
            return Action{Action::Type::Debug, buggy[rng.index(buggy.size())]};
        }
    }
    return Action{Action::Type::Improve, best_node(tree)};
}

std::int64_t best_node(const SearchTree& tree) {
    const double target = tree.config().target_val_loss;
    std::int64_t best = 0;
    std::optional<double> best_time;
    for (std::int64_t id = 0; id < static_cast<std::int64_t>(tree.size()); ++id) {
        const SolutionNode n = tree.node(id);
        if (n.status != NodeStatus::completed) continue;
        const auto time = n.train_time_s();
        const auto loss = n.val_loss();
        if (!time || !loss || *loss > target) continue;
        if (!best_time || *time < *best_time) {  // ties keep the earlier ordinal
            best_time = *time;
            best = id;
        }
    }
    return best;
}

std::vector<pipeline::HistoryEntry> history_chain(const SearchTree& tree,
                                                  std::int64_t parent_id) {
    std::vector<SolutionNode> chain;
    for (std::int64_t id = parent_id; id != 0;) {
        const SolutionNode n = tree.node(id);
        chain.push_back(n);
        if (!n.parent_id) break;  // unreachable for well-formed trees
        id = *n.parent_id;
    }
    std::reverse(chain.begin(), chain.end());

    std::vector<pipeline::HistoryEntry> entries;
    entries.reserve(chain.size());
    for (const SolutionNode& n : chain) {
        pipeline::HistoryEntry e;
        e.version = n.id;
        // Children of the root are drafts with no prior version to cite.
        if (n.parent_id && *n.parent_id != 0) e.parent_version = *n.parent_id;
        e.hypothesis = n.hypothesis;
        e.metrics = n.metrics;
        e.has_bugs = n.status == NodeStatus::buggy;
        e.outcome_summary = n.outcome_summary;
        entries.push_back(std::move(e));
    }
    return entries;
}

std::int64_t step(SearchTree& tree, pipeline::StagePipeline& stages, util::Rng& rng) {
    const SearchConfig& config = tree.config();
    if (tree.expansions_used() >= config.budget_m) throw BudgetExhausted();

    // Continue the current branch group if one is open; otherwise select.
    ActionKind kind = ActionKind::seed;
    std::int64_t parent_id = 0;
    if (!tree.pending_group()) {
        const Action action = select_action(tree, rng);
        switch (action.type) {
            case Action::Type::SeedRoot:
                kind = ActionKind::seed;
                parent_id = 0;
                break;
            case Action::Type::Improve:
            case Action::Type::Debug:
                kind = action.type == Action::Type::Improve ? ActionKind::improve
                                                            : ActionKind::debug;
                parent_id = action.target;
                // Branch factor n expands this parent over n consecutive
                // steps; the group also pins the retry target if a backend
                // outage interrupts mid-step.
                tree.set_pending_group(PendingGroup{parent_id, kind, config.variant.n});
                break;
        }
    }
    if (tree.pending_group()) {
        kind = tree.pending_group()->kind;
        parent_id = tree.pending_group()->parent_id;
    }

    const std::int64_t id = static_cast<std::int64_t>(tree.size());
    const auto node_dir = tree.node_dir(id);
    std::filesystem::create_directories(node_dir);

    pipeline::ExpandInput input;
    input.node_dir = node_dir;
    input.parent_solution = tree.node_artifact(parent_id);
    input.history = history_chain(tree, parent_id);

    SolutionNode node;
    node.id = id;
    node.parent_id = parent_id;
    node.created_ordinal = id;
    node.action_kind = kind;
    node.artifact_ref = SearchTree::node_dir_name(id);
    node.debug_depth = kind == ActionKind::debug ? tree.node(parent_id).debug_depth + 1 : 0;

    try {
        const pipeline::ExpandOutcome outcome = stages.expand(input);
        node.status = outcome.results.has_bugs ? NodeStatus::buggy : NodeStatus::completed;
        node.hypothesis = outcome.results.hypothesis;
        node.metrics = outcome.results.metrics;
        node.outcome_summary = outcome.results.outcome_summary;
    } catch (const backend::BackendError&) {
        // No node was appended; clean up so a retry starts fresh.
        std::error_code ec;
        std::filesystem::remove_all(node_dir, ec);
        tree.set_rng_draws(rng.draw_count());
        persist(tree);
        throw;
    } catch (const std::exception& e) {
        // Unexpected stage failure: contain it as a buggy node.
        node.status = NodeStatus::buggy;
        node.outcome_summary = std::string("stage failure: ") + e.what();
        if (!std::filesystem::exists(tree.node_artifact(id))) {
            util::write_file(tree.node_artifact(id), util::read_file(input.parent_solution));
        }
        pipeline::ResultsRecord results;
        results.has_bugs = true;
        results.outcome_summary = node.outcome_summary;
        pipeline::write_results(node_dir, stages.templates(), results);
    }

    tree.append_node(std::move(node));
    if (tree.pending_group()) tree.consume_pending_slot();
    tree.set_rng_draws(rng.draw_count());
    persist(tree);
    return id;
}

void run(SearchTree& tree, pipeline::StagePipeline& stages, util::Rng& rng) {
    int consecutive_failures = 0;
    while (tree.expansions_used() < tree.config().budget_m) {
        try {
            step(tree, stages, rng);
            consecutive_failures = 0;
        } catch (const backend::BackendError& e) {
            if (++consecutive_failures >= 3) {
                tree.mark_truncated(std::string("backend unavailable: ") + e.what());
                persist(tree);
                return;
            }
        }
    }
    persist(tree);
}

std::map<std::string, double> node_type_fractions(const SearchTree& tree) {
    const auto total = static_cast<std::int64_t>(tree.size()) - 1;
    if (total < 1) {
        throw std::invalid_argument("node_type_fractions: tree has no expanded nodes");
    }
    std::int64_t buggy = 0, improved = 0, unimproved = 0;
    for (std::int64_t id = 1; id <= total; ++id) {
        const SolutionNode n = tree.node(id);
        switch (classify(n, tree.node(*n.parent_id), tree.config().target_val_loss)) {
            case NodeClass::Buggy: ++buggy; break;
            case NodeClass::Improved: ++improved; break;
            case NodeClass::Unimproved: ++unimproved; break;
        }
    }
    const auto denom = static_cast<double>(total);
    return {{"buggy", static_cast<double>(buggy) / denom},
            {"improved", static_cast<double>(improved) / denom},
            {"unimproved", static_cast<double>(unimproved) / denom}};
}

}  // namespace speedrun::search
