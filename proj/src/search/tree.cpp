#include "speedrun/search/tree.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "speedrun/util/io.hpp"

namespace speedrun::search {

using nlohmann::json;

SearchTree::SearchTree(std::filesystem::path run_dir, std::string solution_filename,
                       SearchConfig config)
    : run_dir_(std::move(run_dir)), solution_filename_(std::move(solution_filename)),
      config_(std::move(config)) {
    config_.validate();
    if (solution_filename_.empty()) {
        throw std::invalid_argument("search tree: solution filename must be non-empty");
    }
}

std::size_t SearchTree::size() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return nodes_.size();
}

int SearchTree::expansions_used() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return nodes_.empty() ? 0 : static_cast<int>(nodes_.size()) - 1;
}

SolutionNode SearchTree::node(std::int64_t id) const {
    std::lock_guard<std::mutex> lock(*mu_);
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw std::out_of_range("no such node: " + std::to_string(id));
    }
    return nodes_[static_cast<std::size_t>(id)];
}

std::vector<std::int64_t> SearchTree::children_of(std::int64_t id) const {
    std::lock_guard<std::mutex> lock(*mu_);
    std::vector<std::int64_t> out;
    for (const auto& n : nodes_) {
        if (n.parent_id && *n.parent_id == id) out.push_back(n.id);
    }
    return out;
}

std::int64_t SearchTree::append_node(SolutionNode node) {
    std::lock_guard<std::mutex> lock(*mu_);
    if (node.id != static_cast<std::int64_t>(nodes_.size())) {
        throw std::invalid_argument("node id must equal the creation ordinal");
    }
    if (node.created_ordinal != node.id) {
        throw std::invalid_argument("node ordinal must equal its id");
    }
    if (nodes_.empty()) {
        if (node.parent_id) throw std::invalid_argument("root node cannot have a parent");
    } else {
        if (!node.parent_id) throw std::invalid_argument("non-root node needs a parent");
        if (*node.parent_id < 0 || static_cast<std::size_t>(*node.parent_id) >= nodes_.size()) {
            throw std::invalid_argument("parent id does not resolve: " +
                                        std::to_string(*node.parent_id));
        }
    }
    if (node.debug_depth > config_.variant.d_max) {
        throw std::invalid_argument("debug depth exceeds d_max");
    }
    nodes_.push_back(std::move(node));
    return nodes_.back().id;
}

void SearchTree::mark_truncated(const std::string& reason) {
    truncated_ = true;
    truncation_reason_ = reason;
}

void SearchTree::consume_pending_slot() {
    if (!pending_) throw std::logic_error("no pending group to consume");
    if (--pending_->remaining <= 0) pending_.reset();
}

std::string SearchTree::node_dir_name(std::int64_t id) {
    std::ostringstream out;
    out << std::setw(3) << std::setfill('0') << id;
    return out.str();
}

std::filesystem::path SearchTree::node_dir(std::int64_t id) const {
    return run_dir_ / node_dir_name(id);
}

std::filesystem::path SearchTree::node_artifact(std::int64_t id) const {
    return node_dir(id) / solution_filename_;
}

json SearchTree::to_json() const {
    std::lock_guard<std::mutex> lock(*mu_);
    json nodes = json::array();
    for (const auto& n : nodes_) nodes.push_back(n.to_json());
    json j{{"config", config_.to_json()},
           {"solution_filename", solution_filename_},
           {"rng_draws", rng_draws_},
           {"truncated", truncated_},
           {"nodes", std::move(nodes)}};
    if (truncated_) j["truncation_reason"] = truncation_reason_;
    if (pending_) {
        j["pending_group"] = json{{"parent", pending_->parent_id},
                                  {"action", action_kind_name(pending_->kind)},
                                  {"remaining", pending_->remaining}};
    } else {
        j["pending_group"] = nullptr;
    }
    return j;
}

SearchTree new_search(const std::filesystem::path& run_dir,
                      const std::filesystem::path& root_artifact, const SearchConfig& config,
                      const std::string& solution_filename, double root_time_s,
                      const pipeline::TemplateStore& templates) {
    config.validate();
    if (!(root_time_s > 0)) {
        throw std::invalid_argument("new_search: root baseline time must be positive");
    }
    const std::string root_code = util::read_file(root_artifact);  // throws if unreadable

    SearchTree tree(run_dir, solution_filename, config);
    std::filesystem::create_directories(run_dir);

    SolutionNode root;
    root.id = 0;
    root.created_ordinal = 0;
    root.action_kind = ActionKind::seed;
    root.status = NodeStatus::completed;
    root.artifact_ref = SearchTree::node_dir_name(0);
    root.metrics["train_time_s"] = root_time_s;
    root.metrics["val_loss"] = config.target_val_loss;
    root.outcome_summary = "baseline record";

    const auto root_dir = tree.node_dir(0);
    std::filesystem::create_directories(root_dir);
    util::write_file(tree.node_artifact(0), root_code);
    pipeline::ResultsRecord results;
    results.metrics = root.metrics;
    results.outcome_summary = root.outcome_summary;
    pipeline::write_results(root_dir, templates, results);

    tree.append_node(std::move(root));
    persist(tree);
    return tree;
}

void persist(const SearchTree& tree) {
    const auto manifest_path = tree.run_dir() / "manifest.json";
    const auto tmp_path = tree.run_dir() / "manifest.json.tmp";
    util::write_file(tmp_path, tree.to_json().dump(2) + "\n");
    std::filesystem::rename(tmp_path, manifest_path);
}

SearchTree load_tree(const std::filesystem::path& run_dir) {
    const auto manifest_path = run_dir / "manifest.json";
    const json j = json::parse(util::read_file(manifest_path));

    SearchTree tree(run_dir, j.at("solution_filename").get<std::string>(),
                    SearchConfig::from_json(j.at("config")));
    for (const auto& node_json : j.at("nodes")) {
        tree.append_node(SolutionNode::from_json(node_json));
    }
    if (tree.size() == 0) {
        throw std::runtime_error("persisted tree has no root: " + manifest_path.string());
    }
    tree.set_rng_draws(j.at("rng_draws").get<std::uint64_t>());
    if (j.at("truncated").get<bool>()) {
        tree.mark_truncated(j.value("truncation_reason", ""));
    }
    if (!j.at("pending_group").is_null()) {
        const auto& p = j.at("pending_group");
        PendingGroup group;
        group.parent_id = p.at("parent").get<std::int64_t>();
        group.kind = parse_action_kind(p.at("action").get<std::string>());
        group.remaining = p.at("remaining").get<int>();
        if (group.remaining < 1) {
            throw std::runtime_error("persisted pending group has no remaining slots");
        }
        tree.set_pending_group(group);
    }
    return tree;
}

}  // namespace speedrun::search
