#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "speedrun/pipeline/prompts.hpp"
#include "speedrun/pipeline/stage.hpp"
#include "speedrun/search/types.hpp"
#include "speedrun/util/rng.hpp"

namespace speedrun::search {

// An Improve/Debug selection being expanded: the branch factor n expands the
// same parent over n consecutive steps, and this records how many are left.
struct PendingGroup {
    std::int64_t parent_id = 0;
    ActionKind kind = ActionKind::improve;
    int remaining = 0;
};

// The search state: nodes in creation order plus scheduling state, mirrored
// on disk under run_dir (manifest.json + one zero-padded directory per node).
class SearchTree {
public:
    SearchTree(std::filesystem::path run_dir, std::string solution_filename,
               SearchConfig config);

    const SearchConfig& config() const { return config_; }
    const std::filesystem::path& run_dir() const { return run_dir_; }
    const std::string& solution_filename() const { return solution_filename_; }

    std::size_t size() const;
    int expansions_used() const;  // nodes beyond the root
    // Returns a copy: the backing store may reallocate as nodes append.
    SolutionNode node(std::int64_t id) const;
    SolutionNode root() const { return node(0); }
    std::vector<std::int64_t> children_of(std::int64_t id) const;

    // Appends a finished node (id must equal size()).  Guarded so concurrent
    // completion callbacks for distinct nodes are safe.
    std::int64_t append_node(SolutionNode node);

    bool truncated() const { return truncated_; }
    const std::string& truncation_reason() const { return truncation_reason_; }
    void mark_truncated(const std::string& reason);

    const std::optional<PendingGroup>& pending_group() const { return pending_; }
    void set_pending_group(PendingGroup group) { pending_ = group; }
    void consume_pending_slot();  // decrements remaining, clears at zero

    std::uint64_t rng_draws() const { return rng_draws_; }
    void set_rng_draws(std::uint64_t draws) { rng_draws_ = draws; }

    std::filesystem::path node_dir(std::int64_t id) const;
    std::filesystem::path node_artifact(std::int64_t id) const;  // dir/<solution_filename>
    static std::string node_dir_name(std::int64_t id);           // zero-padded ordinal

    nlohmann::json to_json() const;

private:
    std::filesystem::path run_dir_;
    std::string solution_filename_;
    SearchConfig config_;
    std::vector<SolutionNode> nodes_;
    std::optional<PendingGroup> pending_;
    bool truncated_ = false;
    std::string truncation_reason_;
    std::uint64_t rng_draws_ = 0;
    // unique_ptr keeps the tree movable; the guard only matters when sibling
    // expansions complete concurrently.
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

// Creates a run directory with the root node seeded from root_artifact.  The
// root is completed with metrics {train_time_s: root_time_s, val_loss:
// config.target_val_loss} — the known baseline measurements of the starting
// record.  Fails if the artifact is unreadable or the config invalid.
SearchTree new_search(const std::filesystem::path& run_dir,
                      const std::filesystem::path& root_artifact, const SearchConfig& config,
                      const std::string& solution_filename, double root_time_s,
                      const pipeline::TemplateStore& templates);

// Rebuilds a tree from a persisted run directory.
SearchTree load_tree(const std::filesystem::path& run_dir);

// Writes manifest.json (atomically) for the current tree state.
void persist(const SearchTree& tree);

struct Action {
    enum class Type { SeedRoot, Improve, Debug };
    Type type = Type::SeedRoot;
    std::int64_t target = 0;  // parent node id for Improve/Debug
};

class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted() : std::runtime_error("search budget exhausted") {}
};

// Picks the next action: SeedRoot while the root has fewer than n0 children;
// otherwise draws u in [0,1) and debugs a uniformly random eligible buggy
// node (status buggy, debug_depth < d_max) when u < p_debug and one exists,
// else improves best_node.  Throws BudgetExhausted past the budget.
Action select_action(const SearchTree& tree, util::Rng& rng);

// The node to build on: minimal train_time_s among completed nodes that
// reached the target loss, ties to the earliest ordinal; the root when
// nothing qualifies.
std::int64_t best_node(const SearchTree& tree);

// Version-log entries for the ancestor chain of parent_id: every non-root
// ancestor, oldest first, parent included.  (Root children see an empty log.)
std::vector<pipeline::HistoryEntry> history_chain(const SearchTree& tree,
                                                  std::int64_t parent_id);

// Performs one expansion: selects (or continues a branch group), runs the
// stage pipeline, appends the resulting node, persists, and returns the new
// node id.  Stage failures become buggy nodes; backend outages propagate
// unchanged with no node appended, so the same step can be retried.
std::int64_t step(SearchTree& tree, pipeline::StagePipeline& stages, util::Rng& rng);

// Steps until the budget is exhausted.  Three consecutive backend failures
// on the same step truncate the search: the partial tree is persisted with
// the truncation marker instead of looping forever.
void run(SearchTree& tree, pipeline::StagePipeline& stages, util::Rng& rng);

// Fractions of expanded (non-root) nodes per class, keys "buggy" /
// "improved" / "unimproved", summing to 1.  Error on a root-only tree.
std::map<std::string, double> node_type_fractions(const SearchTree& tree);

}  // namespace speedrun::search
