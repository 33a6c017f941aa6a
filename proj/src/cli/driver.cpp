#include "speedrun/cli/driver.hpp"

#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "speedrun/eval/similarity.hpp"
#include "speedrun/eval/stats.hpp"
#include "speedrun/util/io.hpp"
#include "speedrun/util/rng.hpp"

namespace speedrun::cli {

namespace fs = std::filesystem;
using nlohmann::json;

RunOutcome run_search(const RunSpec& spec, backend::ChatBackend& coder,
                      backend::ChatBackend& analyst, backend::ChatBackend* embedder,
                      pipeline::ExecutionAdapter& adapter,
                      const pipeline::TemplateStore& templates) {
    pipeline::TaskContext ctx;
    ctx.task_description = spec.task_description;
    ctx.goal = spec.goal;
    ctx.packages = spec.packages;
    ctx.solution_filename = spec.solution_filename;
    ctx.knowledge = spec.task.hints.payload_texts();
    for (const auto& entry : spec.extra_knowledge) ctx.knowledge.push_back(entry);
    ctx.metric_schema = {{"train_time_s", "float"}, {"val_loss", "float"}};
    ctx.runtime_cap_s = spec.config.runtime_cap_s;
    ctx.coder_model_id = spec.model_label;
    ctx.analyst_model_id = spec.model_label;

    const bool resuming = fs::exists(spec.run_dir / "manifest.json");
    search::SearchTree tree =
        resuming ? search::load_tree(spec.run_dir)
                 : search::new_search(spec.run_dir, spec.task.start_artifact, spec.config,
                                      spec.solution_filename, spec.task.prev_time_s(), templates);

    // Replay the random stream up to where the persisted run left off.
    util::Rng rng(tree.config().rng_seed);
    rng.skip(tree.rng_draws());

    pipeline::StagePipeline stages(coder, analyst, adapter, templates, ctx);
    search::run(tree, stages, rng);

    if (tree.expansions_used() == 0) {
        throw std::runtime_error("search produced no nodes (" +
                                 (tree.truncated() ? tree.truncation_reason()
                                                   : std::string("empty budget")) +
                                 ")");
    }

    RunOutcome out;
    out.best_id = search::best_node(tree);
    out.best_artifact = tree.node_artifact(out.best_id);
    out.truncated = tree.truncated();
    if (out.best_id != 0) out.best_time_s = tree.node(out.best_id).train_time_s();

    eval::FsrInput fin;
    fin.prev_record_s = spec.task.prev_time_s();
    fin.next_record_s = spec.task.next_time_s();
    fin.agent_s = out.best_time_s;
    out.fsr = eval::fsr(fin);

    eval::RunRecord rec;
    rec.model_id = spec.model_label;
    rec.scaffold = search::scaffold_kind_name(tree.config().variant.kind);
    rec.hint_levels.assign(spec.task.hints.levels.begin(), spec.task.hints.levels.end());
    rec.record_index = spec.task.transition;
    rec.seed = tree.config().rng_seed;
    rec.fsr = out.fsr;
    rec.node_fractions = search::node_type_fractions(tree);
    rec.best_time_s = out.best_time_s;
    rec.baseline_time_s = spec.task.prev_time_s();

    if (spec.compute_similarity) {
        const std::string prev_code = util::read_file(spec.task.start_artifact);
        const std::string next_code = util::read_file(spec.task.next_artifact);
        const std::string agent_code = util::read_file(out.best_artifact);
        if (embedder != nullptr) {
            rec.distance_recovered =
                eval::distance_recovered(*embedder, prev_code, next_code, agent_code);
        }
        rec.judge_score = eval::judge_score(analyst, templates.get("judge"), prev_code,
                                            next_code, agent_code, spec.model_label);
    }

    util::write_file(spec.run_dir / "run_record.json", rec.to_json().dump(2) + "\n");
    out.record = rec;
    return out;
}

std::vector<ChainLink> run_chain(const ChainSpec& spec, backend::ChatBackend& coder,
                                 backend::ChatBackend& analyst,
                                 pipeline::ExecutionAdapter& adapter,
                                 const pipeline::TemplateStore& templates) {
    if (spec.first_transition > spec.last_transition)
        throw std::invalid_argument("chain: first transition past last");
    const auto manifest = tasks::load_manifest(spec.manifest_path);

    std::vector<ChainLink> links;
    fs::path carried_artifact;  // best solution of the previous link

    for (int t = spec.first_transition; t <= spec.last_transition; ++t) {
        // make_task loads the hint payloads; the cumulative builder then
        // swaps in the carried artifact while keeping ground-truth times.
        tasks::RecordTask task = tasks::make_task(manifest, t, spec.hint_levels);
        if (!links.empty())
            task = tasks::make_cumulative_task(carried_artifact, manifest, t, task.hints);

        char name[16];
        std::snprintf(name, sizeof name, "link_%02d", t);

        RunSpec run;
        run.task = task;
        run.config = spec.config;
        run.run_dir = spec.out_root / name;
        run.model_label = spec.model_label;
        run.solution_filename = spec.solution_filename;
        run.task_description = spec.task_description;
        run.goal = spec.goal;
        run.packages = spec.packages;
        const RunOutcome out = run_search(run, coder, analyst, nullptr, adapter, templates);

        ChainLink link;
        link.transition = t;
        link.fsr = out.fsr;
        link.best_time_s = out.best_time_s;
        link.artifact = out.best_artifact;
        links.push_back(link);

        carried_artifact = out.best_artifact;
    }

    // Chain-level speedup trace: a failed link carries the previous time
    // forward (its artifact is unchanged, so its measured time is too).
    std::vector<std::pair<std::string, double>> trace;
    double base_s = 0;
    {
        tasks::RecordTask first = tasks::make_task(manifest, spec.first_transition,
                                                   std::set<int>{0});
        base_s = first.prev_time_s();
    }
    double current = base_s;
    for (const auto& link : links) {
        if (link.best_time_s) current = *link.best_time_s;
        trace.emplace_back("transition_" + std::to_string(link.transition), current);
    }
    eval::write_cumulative_csv(spec.out_root / "cumulative.csv", base_s, trace);
    return links;
}

}  // namespace speedrun::cli
