// Acceptance checks for the search framework: one pass/fail line per
// criterion, exit status 0 only when every criterion holds.  Everything runs
// offline against the scripted backend and the simulated training task.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "speedrun/backend/mock.hpp"
#include "speedrun/cli/commands.hpp"
#include "speedrun/cli/driver.hpp"
#include "speedrun/eval/similarity.hpp"
#include "speedrun/eval/stats.hpp"
#include "speedrun/pipeline/stage.hpp"
#include "speedrun/pipeline/templates.hpp"
#include "speedrun/search/tree.hpp"
#include "speedrun/tasks/adapters.hpp"
#include "speedrun/tasks/task.hpp"
#include "speedrun/util/io.hpp"
#include "speedrun/util/rng.hpp"
#include "support/golden_fixtures.hpp"
#include "support/scripted.hpp"

namespace fs = std::filesystem;
using namespace speedrun;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

void require_close(double got, double want, double rel, const std::string& what) {
    const double tol = rel * std::max({std::fabs(got), std::fabs(want), 1e-300});
    if (std::fabs(got - want) > tol) {
        std::ostringstream msg;
        msg << what << ": got " << got << ", want " << want;
        throw Failure(msg.str());
    }
}

fs::path scratch(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "speedrun_acceptance" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

// ---- shared search-run helpers -------------------------------------------

pipeline::TaskContext sim_context() {
    pipeline::TaskContext ctx;
    ctx.task_description = "Tune the training pipeline knobs.";
    ctx.goal = "minimize training wall time without degrading validation loss";
    ctx.packages = {"torch"};
    ctx.solution_filename = "solution.txt";
    ctx.metric_schema = {{"train_time_s", "float"}, {"val_loss", "float"}};
    ctx.runtime_cap_s = 3600;
    ctx.coder_model_id = "scripted";
    ctx.analyst_model_id = "scripted";
    return ctx;
}

search::SearchConfig scaffold_config(search::ScaffoldKind kind, double p_debug, int d_max,
                                     std::uint64_t seed) {
    search::SearchConfig config;
    config.variant = search::ScaffoldVariant::make(kind, 3, 3, p_debug, d_max, 20);
    config.budget_m = 20;
    config.rng_seed = seed;
    return config;
}

search::SearchTree run_search_tree(const fs::path& dir, const search::SearchConfig& config,
                                   backend::ChatBackend& coder) {
    backend::MockScript quiet;
    quiet.default_response = "run summarized";
    backend::MockBackend analyst(quiet);
    tasks::SimulatedAdapter adapter;
    const auto templates = pipeline::TemplateStore::load_default();
    auto tree = search::new_search(dir, testsupport::sim_record_artifact(1), config,
                                   "solution.txt", 600.0, templates);
    pipeline::StagePipeline stage(coder, analyst, adapter, templates, sim_context());
    util::Rng rng(config.rng_seed);
    search::run(tree, stage, rng);
    return tree;
}

int count_kind(const search::SearchTree& tree, search::ActionKind kind) {
    int count = 0;
    for (std::int64_t id = 1; id < static_cast<std::int64_t>(tree.size()); ++id)
        if (tree.node(id).action_kind == kind) ++count;
    return count;
}

int max_child_count(const search::SearchTree& tree) {
    int most = 0;
    for (std::int64_t id = 1; id < static_cast<std::int64_t>(tree.size()); ++id)
        most = std::max(most, static_cast<int>(tree.children_of(id).size()));
    return most;
}

// ---- independent long-double oracles for criterion 1 ----------------------

long double brute_fsr(long double prev, long double next, std::optional<long double> agent) {
    if (!agent) return 0.0L;
    return (prev - *agent) / (prev - next);
}

long double brute_mean(const std::vector<double>& v) {
    long double sum = 0;
    for (double x : v) sum += x;
    return sum / static_cast<long double>(v.size());
}

long double brute_iqm(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t drop = v.size() / 4;
    long double sum = 0;
    std::size_t kept = 0;
    for (std::size_t i = drop; i < v.size() - drop; ++i, ++kept) sum += v[i];
    return sum / static_cast<long double>(kept);
}

long double brute_distance(const std::vector<double>& p, const std::vector<double>& n,
                           const std::vector<double>& a) {
    long double num = 0, den = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        num += (static_cast<long double>(n[i]) - a[i]) * (static_cast<long double>(n[i]) - a[i]);
        den += (static_cast<long double>(n[i]) - p[i]) * (static_cast<long double>(n[i]) - p[i]);
    }
    return 1.0L - std::sqrt(num) / std::sqrt(den);
}

long double brute_correlate(const std::vector<double>& xs, const std::vector<double>& ys) {
    const long double mx = brute_mean(xs), my = brute_mean(ys);
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// ---- criteria --------------------------------------------------------------

void criterion_metric_oracles() {
    std::mt19937_64 gen(20260814);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    require(eval::fsr({600.0, 400.0, 400.0}) == 1.0, "exact-reproduction fsr is not 1");
    require(eval::fsr({600.0, 400.0, 600.0}) == 0.0, "no-improvement fsr is not 0");
    require(eval::fsr({600.0, 400.0, std::nullopt}) == 0.0, "absent agent time is not 0");
    require(eval::iqm({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}) == 6.5,
            "iqm of 1..12 is not 6.5");
    require(eval::distance_recovered({0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}) == 1.0,
            "distance to the target is not fully recovered");
    require(eval::distance_recovered({0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}) == 0.0,
            "distance at the start is not 0");

    for (int i = 0; i < 250; ++i) {
        const double prev = 100 + 900 * unit(gen);
        const double next = prev * (0.3 + 0.6 * unit(gen));
        const double agent = next * (0.5 + unit(gen));
        require_close(eval::fsr({prev, next, agent}),
                      static_cast<double>(brute_fsr(prev, next, agent)), 1e-12, "fsr oracle");
    }

    for (int i = 0; i < 250; ++i) {
        std::uniform_int_distribution<std::size_t> len(4, 60);
        std::vector<double> v(len(gen));
        for (auto& x : v) x = 2 * unit(gen) - 0.5;
        require_close(eval::mean_fsr(v), static_cast<double>(brute_mean(v)), 1e-12,
                      "mean oracle");
        require_close(eval::iqm(v), static_cast<double>(brute_iqm(v)), 1e-12, "iqm oracle");
    }

    for (int i = 0; i < 250; ++i) {
        std::uniform_int_distribution<std::size_t> dim(1, 40);
        std::vector<double> p(dim(gen)), n(p.size()), a(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] = unit(gen);
            n[k] = p[k] + unit(gen) + 0.01;
            a[k] = unit(gen);
        }
        require_close(eval::distance_recovered(p, n, a),
                      static_cast<double>(brute_distance(p, n, a)), 1e-12,
                      "distance oracle");
    }

    for (int i = 0; i < 250; ++i) {
        const double base = 100 + 2000 * unit(gen);
        std::vector<double> chain(1 + i % 8);
        for (auto& t : chain) t = 10 + 500 * unit(gen);
        const auto got = eval::cumulative_speedup(base, chain);
        for (std::size_t j = 0; j < chain.size(); ++j)
            require_close(got[j], static_cast<double>(static_cast<long double>(base) / chain[j]),
                          1e-12, "cumulative speedup oracle");
    }

    for (int i = 0; i < 250; ++i) {
        std::uniform_int_distribution<std::size_t> len(2, 50);
        std::vector<double> xs(len(gen)), ys(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            xs[k] = unit(gen);
            ys[k] = unit(gen) + 0.3 * xs[k];
        }
        xs.push_back(2.0);  // guarantee variance
        ys.push_back(-1.0);
        require_close(eval::correlate(xs, ys), static_cast<double>(brute_correlate(xs, ys)),
                      1e-12, "correlation oracle");
    }
}

void criterion_scaffold_shapes() {
    const fs::path base = scratch("shapes");
    for (const auto kind :
         {search::ScaffoldKind::Flat, search::ScaffoldKind::Tree, search::ScaffoldKind::Forest,
          search::ScaffoldKind::AIDE, search::ScaffoldKind::MultiAIDE}) {
        const std::string name = search::scaffold_kind_name(kind);
        testsupport::ScriptedSequenceBackend coder(testsupport::strictly_improving_replies());
        const auto tree =
            run_search_tree(base / name, scaffold_config(kind, 0.5, 5, 11), coder);

        require(tree.size() == 21, name + ": tree does not hold 21 nodes");
        const auto root_children = tree.children_of(0).size();
        const int debug_nodes = count_kind(tree, search::ActionKind::debug);
        switch (kind) {
            case search::ScaffoldKind::Flat:
                require(root_children == 20, "Flat: root does not have 20 children");
                require(debug_nodes == 0, "Flat: debug nodes appeared");
                break;
            case search::ScaffoldKind::Tree:
                require(root_children == 1, "Tree: more than one seeded subtree");
                require(debug_nodes == 0, "Tree: debug nodes appeared");
                break;
            case search::ScaffoldKind::Forest:
                require(root_children == 3, "Forest: root does not have 3 children");
                require(debug_nodes == 0, "Forest: debug nodes appeared");
                break;
            case search::ScaffoldKind::AIDE:
                require(root_children == 3, "AIDE: root does not have 3 children");
                require(max_child_count(tree) == 1, "AIDE: branch factor exceeds 1");
                break;
            case search::ScaffoldKind::MultiAIDE:
                require(root_children == 3, "Multi-AIDE: root does not have 3 children");
                require(max_child_count(tree) == 3, "Multi-AIDE: branch factor is not 3");
                break;
        }
    }
    fs::remove_all(base);
}

void criterion_debug_bounds() {
    const fs::path base = scratch("debug");
    {
        testsupport::ScriptedSequenceBackend coder(testsupport::always_buggy_replies());
        const auto tree = run_search_tree(
            base / "always", scaffold_config(search::ScaffoldKind::MultiAIDE, 1.0, 5, 9),
            coder);
        require(count_kind(tree, search::ActionKind::debug) > 0,
                "p_debug=1 produced no debug nodes");
        for (std::int64_t id = 1; id < static_cast<std::int64_t>(tree.size()); ++id) {
            const auto node = tree.node(id);
            require(node.debug_depth <= 5, "debug chain exceeded depth 5");
            if (node.action_kind == search::ActionKind::debug) {
                const auto parent = tree.node(*node.parent_id);
                require(node.debug_depth == parent.debug_depth + 1,
                        "debug depth does not extend the parent chain");
            }
        }
    }
    {
        testsupport::ScriptedSequenceBackend coder(testsupport::always_buggy_replies());
        const auto tree = run_search_tree(
            base / "never", scaffold_config(search::ScaffoldKind::MultiAIDE, 0.0, 5, 9),
            coder);
        require(count_kind(tree, search::ActionKind::debug) == 0,
                "p_debug=0 still produced debug nodes");
    }
    fs::remove_all(base);
}

cli::RunSpec base_runspec(const fs::path& dir, int transition) {
    const auto manifest = tasks::load_manifest(testsupport::sim_manifest_path());
    cli::RunSpec spec;
    spec.task = tasks::make_task(manifest, transition, std::set<int>{0});
    spec.config = scaffold_config(search::ScaffoldKind::AIDE, 0.5, 5, 13);
    spec.run_dir = dir;
    spec.model_label = "scripted";
    spec.solution_filename = "solution.txt";
    spec.task_description = "Tune the training pipeline knobs.";
    spec.goal = "minimize training wall time without degrading validation loss";
    spec.packages = {"torch"};
    return spec;
}

void criterion_simulated_speedrun() {
    const fs::path base = scratch("e2e");
    const auto templates = pipeline::TemplateStore::load_default();
    backend::MockScript quiet;
    quiet.default_response = "run summarized";
    backend::MockBackend analyst(quiet);
    tasks::SimulatedAdapter adapter;

    {
        testsupport::ScriptedSequenceBackend coder(
            {testsupport::fenced_reply("fuse kernels", testsupport::knob_file(true))}, true);
        const auto out = cli::run_search(base_runspec(base / "win", 1), coder, analyst,
                                         nullptr, adapter, templates);
        require(std::fabs(out.fsr - 1.0) <= 1e-9, "knob-enabling script did not reach fsr 1");
        require(out.best_time_s && std::fabs(*out.best_time_s - 400.0) < 1e-9,
                "best time is not the 400 s record");
    }
    {
        testsupport::ScriptedSequenceBackend coder({"I decline to edit anything."}, true);
        const auto out = cli::run_search(base_runspec(base / "lose", 1), coder, analyst,
                                         nullptr, adapter, templates);
        require(out.fsr == 0.0, "edit-free run did not score fsr 0");
        require(out.best_id == 0, "edit-free run still picked a non-root best node");
    }
    fs::remove_all(base);
}

void criterion_cumulative_chain() {
    const fs::path base = scratch("chain");
    const auto templates = pipeline::TemplateStore::load_default();

    cli::ChainSpec spec;
    spec.manifest_path = testsupport::sim_manifest_path();
    spec.first_transition = 1;
    spec.last_transition = 3;
    spec.config.variant =
        search::ScaffoldVariant::make(search::ScaffoldKind::Forest, 3, 1, 0.0, 0, 3);
    spec.config.budget_m = 3;
    spec.config.rng_seed = 4;
    spec.out_root = base;
    spec.model_label = "scripted";
    spec.solution_filename = "solution.txt";
    spec.task_description = "Tune the training pipeline knobs.";
    spec.goal = "minimize training wall time without degrading validation loss";

    testsupport::ScriptedSequenceBackend coder([](std::size_t k) -> std::string {
        if (k < 3) return testsupport::fenced_reply("fuse", testsupport::knob_file(true));
        if (k < 6) return "I have no idea.";  // the middle search produces nothing usable
        return testsupport::fenced_reply("fuse overlap cache",
                                         testsupport::knob_file(true, true, true));
    });
    backend::MockScript quiet;
    quiet.default_response = "run summarized";
    backend::MockBackend analyst(quiet);
    tasks::SimulatedAdapter adapter;

    const auto links = cli::run_chain(spec, coder, analyst, adapter, templates);
    require(links.size() == 3, "chain did not produce 3 links");
    require(std::fabs(links[0].fsr - 1.0) <= 1e-9, "link 1 did not recover the speedup");
    require(links[1].fsr == 0.0, "failing middle link did not score fsr 0");
    require(std::fabs(links[2].fsr - 1.0) <= 1e-9, "link 3 did not recover the speedup");
    require(util::read_file(links[1].artifact) == testsupport::knob_file(true),
            "failing link did not fall back to the unchanged artifact");
    require(util::read_file(links[2].artifact) ==
                testsupport::knob_file(true, true, true),
            "link 3 did not build on the carried artifact");
    fs::remove_all(base);
}

void criterion_node_accounting() {
    const fs::path base = scratch("accounting");
    // a mix of crashing, improving and unusable replies
    testsupport::ScriptedSequenceBackend coder([](std::size_t k) -> std::string {
        switch (k % 3) {
            case 0:
                return testsupport::fenced_reply(
                    "unstable", testsupport::knob_file(false, false, false, false, false, 0,
                                                       true));
            case 1:
                return testsupport::fenced_reply(
                    "tune", testsupport::knob_file(false, false, false, false, false,
                                                   static_cast<int>(k) + 1));
            default:
                return "no code block here";
        }
    });
    const auto tree = run_search_tree(
        base, scaffold_config(search::ScaffoldKind::MultiAIDE, 0.5, 5, 21), coder);

    require(tree.expansions_used() == 20, "run did not expand exactly 20 nodes");
    const auto fractions = search::node_type_fractions(tree);
    double sum = 0;
    int counted = 0;
    for (const char* key : {"buggy", "improved", "unimproved"}) {
        const double f = fractions.at(key);
        const double count = f * 20.0;
        require(std::fabs(count - std::llround(count)) < 1e-9,
                std::string(key) + " fraction is not a whole node count");
        counted += static_cast<int>(std::llround(count));
        sum += f;
    }
    require(counted == 20, "class counts do not add up to the budget");
    require(std::fabs(sum - 1.0) <= 1e-12, "fractions do not sum to 1");
    fs::remove_all(base);
}

void criterion_prompt_goldens() {
    const fs::path golden_dir = SPEEDRUN_GOLDEN_DIR;
    const auto templates = pipeline::TemplateStore::load_default();
    for (const auto& [name, rendered] : testsupport::render_golden_prompts(templates)) {
        const fs::path path = golden_dir / (name + ".txt");
        require(fs::exists(path), "missing golden file " + path.string());
        require(rendered == util::read_file(path), name + " drifted from its golden file");
    }
}

void criterion_execution_cap() {
    const fs::path base = scratch("cap");
    fs::create_directories(base / "direct");
    util::write_file(base / "direct" / "solution.txt", "sleep 300\n");

    tasks::CommandConfig cmd;
    cmd.argv = {"/bin/sh", "{solution}"};
    tasks::CommandAdapter adapter(cmd);
    const auto execution =
        adapter.execute(base / "direct" / "solution.txt", base / "direct", 5.0);
    require(execution.exit_kind == pipeline::ExitKind::timeout,
            "sleep-forever run was not classified as a timeout");
    require(execution.wall_time_s >= 5.0 && execution.wall_time_s <= 7.0,
            "timeout wall time left [5, 7] s");

    // the same cap inside a search marks the node buggy
    backend::MockScript script;
    script.default_response = testsupport::fenced_reply("stall forever", "sleep 300\n");
    backend::MockBackend coder(script);
    backend::MockScript quiet;
    quiet.default_response = "{}";
    backend::MockBackend analyst(quiet);

    const auto templates = pipeline::TemplateStore::load_default();
    search::SearchConfig config;
    config.variant = search::ScaffoldVariant::make(search::ScaffoldKind::Flat, 1, 1, 0, 0, 1);
    config.budget_m = 1;
    config.runtime_cap_s = 5.0;
    auto ctx = sim_context();
    ctx.runtime_cap_s = 5.0;
    auto tree = search::new_search(base / "run", base / "direct" / "solution.txt", config,
                                   "solution.txt", 600.0, templates);
    pipeline::StagePipeline stage(coder, analyst, adapter, templates, ctx);
    util::Rng rng(config.rng_seed);
    search::run(tree, stage, rng);
    require(tree.node(1).status == search::NodeStatus::buggy,
            "timed-out node was not marked buggy");
    fs::remove_all(base);
}

void criterion_determinism_resume() {
    const fs::path base = scratch("determinism");
    const auto config = scaffold_config(search::ScaffoldKind::MultiAIDE, 0.5, 5, 99);
    {
        testsupport::ScriptedSequenceBackend coder(testsupport::strictly_improving_replies());
        run_search_tree(base / "a", config, coder);
    }
    {
        testsupport::ScriptedSequenceBackend coder(testsupport::strictly_improving_replies());
        run_search_tree(base / "b", config, coder);
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(base / "a")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), base / "a");
        require(util::read_file(entry.path()) == util::read_file(base / "b" / rel),
                "run files differ at " + rel.string());
        ++compared;
    }
    require(compared > 21, "determinism check compared suspiciously few files");

    // an interrupted grid rerun executes only what is missing
    nlohmann::json grid{
        {"manifest", testsupport::sim_manifest_path().string()},
        {"records", {1, 2}},
        {"hint_regimes", {{0}}},
        {"scaffolds", {"Flat"}},
        {"models", {"m"}},
        {"seeds", {0}},
        {"output_root", (base / "grid_out").string()},
        {"search", {{"budget_m", 3}}},
        {"backends",
         {{"m",
           {{"type", "mock"},
            {"default",
             testsupport::fenced_reply("fuse", testsupport::knob_file(true))}}}}},
        {"adapter", {{"kind", "simulated"}}}};
    util::write_file(base / "grid.json", grid.dump());
    const auto spec = cli::GridSpec::from_json_file(base / "grid.json");

    const auto first = cli::run_grid(spec, 1);
    require(first.executed == 2 && first.failures.empty(), "fresh grid did not run fully");
    fs::remove(base / "grid_out" / "r02_h0_Flat_m_s0" / "DONE");
    const auto second = cli::run_grid(spec, 1);
    require(second.executed == 1, "rerun did not execute exactly the missing cell");
    require(second.skipped == 1, "rerun did not keep the finished cell");
    fs::remove_all(base);
}

void criterion_judge_parsing() {
    const double score =
        eval::parse_judge_reply("Sure!\n{\"reproducibility_score\": 0.42}\nDone.");
    require(std::fabs(score - 0.42) < 1e-12, "valid judge reply did not parse to 0.42");

    bool threw = false;
    try {
        eval::parse_judge_reply("{\"score\": 0.42}");
    } catch (const eval::JudgeParseError&) {
        threw = true;
    }
    require(threw, "reply without the score key did not raise a parse error");

    threw = false;
    try {
        eval::parse_judge_reply("{\"reproducibility_score\": 1.2}");
    } catch (const eval::JudgeParseError&) {
        threw = true;
    }
    require(threw, "out-of-range score did not raise a parse error");
}

struct Criterion {
    int number;
    std::string name;
    double budget_s;  // 0 = no runtime bound
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "metric oracles match brute-force implementations", 5, criterion_metric_oracles},
        {2, "scaffold variants produce their documented tree shapes", 30,
         criterion_scaffold_shapes},
        {3, "debug selection respects p_debug and the depth bound", 10,
         criterion_debug_bounds},
        {4, "simulated speedrun scores fsr 1 for the scripted fix and 0 without edits", 20,
         criterion_simulated_speedrun},
        {5, "cumulative chain carries artifacts and scores links independently", 30,
         criterion_cumulative_chain},
        {6, "node-type counts cover the budget and fractions sum to 1", 0,
         criterion_node_accounting},
        {7, "composed prompts byte-match their golden files", 0, criterion_prompt_goldens},
        {8, "runtime cap kills stuck runs and marks the node buggy", 0,
         criterion_execution_cap},
        {9, "fixed seeds give byte-identical runs and grids resume from missing cells", 0,
         criterion_determinism_resume},
        {10, "judge replies parse to a score or a loud error", 0, criterion_judge_parsing},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (error.empty() && criterion.budget_s > 0 && elapsed > criterion.budget_s) {
            std::ostringstream msg;
            msg << "took " << elapsed << " s (budget " << criterion.budget_s << " s)";
            error = msg.str();
        }
        if (error.empty()) {
            std::cout << "[PASS] criterion " << criterion.number << ": " << criterion.name
                      << "\n";
        } else {
            ++failed;
            std::cout << "[FAIL] criterion " << criterion.number << ": " << criterion.name
                      << " — " << error << "\n";
        }
    }
    if (failed != 0) std::cout << failed << " criteria failed\n";
    return failed == 0 ? 0 : 1;
}
