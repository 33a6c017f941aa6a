#include "speedrun/cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include "speedrun/backend/factory.hpp"
#include "speedrun/cli/driver.hpp"
#include "speedrun/eval/aggregate.hpp"
#include "speedrun/eval/stats.hpp"
#include "speedrun/tasks/adapters.hpp"
#include "speedrun/tasks/hints.hpp"
#include "speedrun/util/data_dir.hpp"
#include "speedrun/util/io.hpp"

namespace speedrun::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.is_absolute() ? p : base / p;
}

// Flat user-facing search settings -> validated SearchConfig.  Fixed
// parameters of the chosen scaffold are normalized away by make().
search::SearchConfig search_config_from_flat(const json& j, search::ScaffoldKind kind,
                                             std::uint64_t seed) {
    const int budget = j.value("budget_m", 20);
    search::SearchConfig config;
    config.variant = search::ScaffoldVariant::make(kind, j.value("n0", 1), j.value("n", 1),
                                                   j.value("p_debug", 0.0), j.value("d_max", 0),
                                                   budget);
    config.budget_m = budget;
    config.runtime_cap_s = j.value("runtime_cap_s", 3600.0);
    config.rng_seed = seed;
    config.target_val_loss = j.value("target_val_loss", 3.28);
    config.validate();
    return config;
}

std::unique_ptr<pipeline::ExecutionAdapter> make_adapter(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "simulated") return std::make_unique<tasks::SimulatedAdapter>();
    if (kind == "command")
        return std::make_unique<tasks::CommandAdapter>(tasks::CommandConfig::from_json(j));
    throw std::invalid_argument("adapter: unknown kind \"" + kind + "\"");
}

std::string default_task_description(const fs::path& manifest_path) {
    const fs::path local = manifest_path.parent_path() / "task_description.txt";
    if (fs::exists(local)) return util::read_file(local);
    return util::read_file(util::data_dir() / "benchmark" / "task_description.txt");
}

constexpr const char* kDefaultGoal =
    "minimize training wall time without degrading validation loss";

std::set<int> levels_from_json(const json& j) {
    std::set<int> levels;
    for (const auto& v : j) levels.insert(v.get<int>());
    if (levels.empty()) levels.insert(0);
    return levels;
}

std::string hint_regime_label(const std::set<int>& levels) {
    std::string label;
    for (int level : levels) {
        if (!label.empty()) label += '-';
        label += std::to_string(level);
    }
    return label;
}

}  // namespace

std::string cell_name(int record, const std::set<int>& hints, search::ScaffoldKind scaffold,
                      const std::string& model, std::uint64_t seed) {
    char head[16];
    std::snprintf(head, sizeof head, "r%02d", record);
    return std::string(head) + "_h" + hint_regime_label(hints) + "_" +
           search::scaffold_kind_name(scaffold) + "_" + model + "_s" + std::to_string(seed);
}

GridSpec GridSpec::from_json_file(const fs::path& path) {
    const json j = json::parse(util::read_file(path));
    const fs::path base = fs::absolute(path).parent_path();

    GridSpec spec;
    spec.manifest_path = resolve(base, j.at("manifest").get<std::string>());
    for (const auto& r : j.at("records")) spec.records.push_back(r.get<int>());
    for (const auto& regime : j.at("hint_regimes")) spec.hint_regimes.push_back(levels_from_json(regime));
    for (const auto& s : j.at("scaffolds"))
        spec.scaffolds.push_back(search::parse_scaffold_kind(s.get<std::string>()));
    for (const auto& m : j.at("models")) spec.models.push_back(m.get<std::string>());
    for (const auto& s : j.at("seeds")) spec.seeds.push_back(s.get<std::uint64_t>());
    spec.output_root = resolve(base, j.at("output_root").get<std::string>());

    spec.search_defaults = j.value("search", json::object());
    spec.backends = j.at("backends");
    spec.adapter = j.value("adapter", json{{"kind", "simulated"}});
    if (j.contains("packages"))
        for (const auto& p : j.at("packages")) spec.packages.push_back(p.get<std::string>());
    spec.task_description = j.contains("task_description")
                                ? util::read_file(resolve(base, j.at("task_description").get<std::string>()))
                                : default_task_description(spec.manifest_path);
    spec.goal = j.value("goal", kDefaultGoal);
    spec.similarity = j.value("similarity", false);

    if (spec.records.empty() || spec.hint_regimes.empty() || spec.scaffolds.empty() ||
        spec.models.empty() || spec.seeds.empty()) {
        throw std::invalid_argument("grid: every cross-product list must be non-empty");
    }
    for (const auto& model : spec.models)
        if (!spec.backends.contains(model))
            throw std::invalid_argument("grid: no backend config named \"" + model + "\"");
    return spec;
}

namespace {

struct Cell {
    int record;
    std::set<int> hints;
    search::ScaffoldKind scaffold;
    std::string model;
    std::uint64_t seed;
};

void run_cell(const GridSpec& spec, const tasks::RecordManifest& manifest,
              const pipeline::TemplateStore& templates, const Cell& cell) {
    const fs::path dir =
        spec.output_root / cell_name(cell.record, cell.hints, cell.scaffold, cell.model, cell.seed);
    fs::create_directories(dir);

    // Config snapshot: enough to re-aggregate this cell without the grid file.
    json snapshot{{"record", cell.record},
                  {"hints", cell.hints},
                  {"scaffold", search::scaffold_kind_name(cell.scaffold)},
                  {"model", cell.model},
                  {"seed", cell.seed}};
    util::write_file(dir / "cell.json", snapshot.dump(2) + "\n");

    const fs::path backend_base = spec.manifest_path.parent_path();
    auto backend = backend::make_backend(spec.backends.at(cell.model), backend_base);
    std::unique_ptr<backend::ChatBackend> embedder_owned;
    backend::ChatBackend* embedder = nullptr;
    if (spec.similarity) {
        if (spec.backends.contains("embedder")) {
            embedder_owned = backend::make_backend(spec.backends.at("embedder"), backend_base);
            embedder = embedder_owned.get();
        } else {
            embedder = backend.get();
        }
    }
    auto adapter = make_adapter(spec.adapter);

    RunSpec run;
    run.task = tasks::make_task(manifest, cell.record, cell.hints);
    run.config = search_config_from_flat(spec.search_defaults, cell.scaffold, cell.seed);
    run.run_dir = dir;
    run.model_label = cell.model;
    run.solution_filename = run.task.start_artifact.filename().string();
    run.task_description = spec.task_description;
    run.goal = spec.goal;
    run.packages = spec.packages;
    run.compute_similarity = spec.similarity;

    run_search(run, *backend, *backend, embedder, *adapter, templates);
    util::write_file(dir / "DONE", "");
}

}  // namespace

GridResult run_grid(const GridSpec& spec, int parallel) {
    if (parallel < 1) throw std::invalid_argument("grid: parallel must be >= 1");
    const auto manifest = tasks::load_manifest(spec.manifest_path);
    const auto templates = pipeline::TemplateStore::load_default();

    std::vector<Cell> todo;
    GridResult result;
    for (int record : spec.records)
        for (const auto& hints : spec.hint_regimes)
            for (auto scaffold : spec.scaffolds)
                for (const auto& model : spec.models)
                    for (auto seed : spec.seeds) {
                        ++result.total;
                        const auto name = cell_name(record, hints, scaffold, model, seed);
                        if (fs::exists(spec.output_root / name / "DONE")) {
                            ++result.skipped;
                            continue;
                        }
                        todo.push_back(Cell{record, hints, scaffold, model, seed});
                    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const Cell& cell = todo[i];
            const auto name =
                cell_name(cell.record, cell.hints, cell.scaffold, cell.model, cell.seed);
            try {
                run_cell(spec, manifest, templates, cell);
                std::lock_guard<std::mutex> lock(mu);
                ++result.executed;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                result.failures.emplace_back(name, e.what());
            }
        }
    };

    const int threads = std::min<int>(parallel, static_cast<int>(todo.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

int cmd_run(const fs::path& config_path, const std::optional<std::uint64_t>& seed_override) {
    try {
        const json j = json::parse(util::read_file(config_path));
        const fs::path base = fs::absolute(config_path).parent_path();

        const json& tj = j.at("task");
        const fs::path manifest_path = resolve(base, tj.at("manifest").get<std::string>());
        const auto manifest = tasks::load_manifest(manifest_path);
        const int transition = tj.at("transition").get<int>();
        const auto levels = levels_from_json(tj.value("hints", json::array({0})));
        tasks::RecordTask task = tasks::make_task(manifest, transition, levels);
        if (tj.contains("cumulative_from")) {
            task = tasks::make_cumulative_task(
                resolve(base, tj.at("cumulative_from").get<std::string>()), manifest, transition,
                task.hints);
        }

        const json& sj = j.at("search");
        const auto kind = search::parse_scaffold_kind(sj.at("scaffold").get<std::string>());
        const std::uint64_t seed =
            seed_override ? *seed_override : sj.value("seed", std::uint64_t{0});
        const auto config = search_config_from_flat(sj, kind, seed);

        const json& bj = j.at("backends");
        auto coder = backend::make_backend(bj.at("coder"), base);
        std::unique_ptr<backend::ChatBackend> analyst_owned;
        backend::ChatBackend* analyst = coder.get();
        if (bj.contains("analyst")) {
            analyst_owned = backend::make_backend(bj.at("analyst"), base);
            analyst = analyst_owned.get();
        }
        std::unique_ptr<backend::ChatBackend> embedder_owned;
        backend::ChatBackend* embedder = nullptr;
        if (bj.contains("embedder")) {
            embedder_owned = backend::make_backend(bj.at("embedder"), base);
            embedder = embedder_owned.get();
        }

        auto adapter = make_adapter(j.value("adapter", json{{"kind", "simulated"}}));
        const auto templates = pipeline::TemplateStore::load_default();

        RunSpec run;
        run.task = task;
        run.config = config;
        run.run_dir = resolve(base, j.at("run_dir").get<std::string>());
        run.model_label = j.value("model_label", std::string("unnamed-model"));
        run.solution_filename =
            j.value("solution_filename", task.start_artifact.filename().string());
        run.task_description =
            j.contains("task_description")
                ? util::read_file(resolve(base, j.at("task_description").get<std::string>()))
                : default_task_description(manifest_path);
        run.goal = j.value("goal", kDefaultGoal);
        if (j.contains("packages"))
            for (const auto& p : j.at("packages")) run.packages.push_back(p.get<std::string>());
        if (j.contains("extra_knowledge"))
            for (const auto& k : j.at("extra_knowledge"))
                run.extra_knowledge.push_back(k.get<std::string>());
        run.compute_similarity =
            j.value("similarity", false) || (embedder != nullptr);

        const RunOutcome out = run_search(run, *coder, *analyst, embedder, *adapter, templates);

        if (out.best_time_s)
            std::printf("best node %lld: %.1f s (baseline %.1f s)\n",
                        static_cast<long long>(out.best_id), *out.best_time_s,
                        task.prev_time_s());
        else
            std::printf("no node beat the baseline (%.1f s)\n", task.prev_time_s());
        std::printf("fsr: %.6f\n", out.fsr);
        if (out.truncated) std::printf("truncated: %s\n", "see manifest.json for the reason");
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_grid(const fs::path& grid_path, int parallel) {
    try {
        const auto spec = GridSpec::from_json_file(grid_path);
        const auto result = run_grid(spec, parallel);
        std::printf("grid: %d cells, %d executed, %d skipped, %zu failed\n", result.total,
                    result.executed, result.skipped, result.failures.size());
        for (const auto& [name, cause] : result.failures)
            std::cerr << "cell " << name << " failed: " << cause << "\n";
        return result.failures.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const fs::path& results_root, const std::vector<std::string>& group_by,
               const std::string& format, const fs::path& out_dir, int resamples, double level) {
    try {
        std::vector<eval::RunRecord> records;
        if (!fs::exists(results_root))
            throw std::invalid_argument("report: no such directory: " + results_root.string());
        for (const auto& entry : fs::recursive_directory_iterator(results_root)) {
            if (!entry.is_regular_file() || entry.path().filename() != "run_record.json") continue;
            records.push_back(
                eval::RunRecord::from_json(json::parse(util::read_file(entry.path()))));
        }
        if (records.empty())
            throw std::invalid_argument("report: no run_record.json under " +
                                        results_root.string());

        std::vector<eval::GroupKey> keys;
        for (const auto& name : group_by) keys.push_back(eval::parse_group_key(name));

        eval::BootstrapParams params;
        params.level = level;
        params.resamples = resamples;
        const auto rows = eval::aggregate(records, keys, params);

        fs::create_directories(out_dir);
        if (format == "json") {
            eval::write_report_json(out_dir / "report.json", rows);
        } else if (format == "csv") {
            eval::write_report_csv(out_dir / "report.csv", rows, keys);
        } else {
            throw std::invalid_argument("report: unknown format \"" + format + "\"");
        }
        eval::write_fsr_bars_csv(out_dir / "fsr_bars.csv", rows);
        eval::write_node_fraction_stacks_csv(out_dir / "node_fractions.csv", rows);
        eval::write_scatter_csv(out_dir / "fsr_scatter.csv", records);

        std::printf("%-40s %4s %9s %9s %19s %7s %7s %7s\n", "group", "n", "fsr_mean", "fsr_iqm",
                    "ci", "buggy", "improv", "unimpr");
        for (const auto& row : rows) {
            std::string label;
            for (const auto& [k, v] : row.group) {
                if (!label.empty()) label += ' ';
                label += k + "=" + v;
            }
            if (label.empty()) label = "(all)";
            char ci[32];
            std::snprintf(ci, sizeof ci, "[%.3f, %.3f]", row.ci.lo, row.ci.hi);
            char iqm_s[16];
            if (row.fsr_iqm_clamped)
                std::snprintf(iqm_s, sizeof iqm_s, "%9.4f", *row.fsr_iqm_clamped);
            else
                std::snprintf(iqm_s, sizeof iqm_s, "%9s", "-");
            std::printf("%-40s %4d %9.4f %s %19s %7.3f %7.3f %7.3f\n", label.c_str(), row.n,
                        row.fsr_mean_clamped, iqm_s, ci, row.frac_buggy, row.frac_improved,
                        row.frac_unimproved);
        }

        // Agreement between FSR and the similarity judges, when present.
        auto print_correlation = [&](const char* name, auto getter) {
            std::vector<double> xs, ys;
            for (const auto& rec : records) {
                const auto v = getter(rec);
                if (!v) continue;
                xs.push_back(std::min(1.0, std::max(0.0, rec.fsr)));
                ys.push_back(*v);
            }
            if (xs.size() < 2) return;
            try {
                std::printf("correlation(fsr, %s) = %.4f  (n=%zu)\n", name,
                            eval::correlate(xs, ys), xs.size());
            } catch (const std::exception&) {
                // degenerate series (zero variance): nothing meaningful to print
            }
        };
        print_correlation("distance_recovered",
                          [](const eval::RunRecord& r) { return r.distance_recovered; });
        print_correlation("judge_score", [](const eval::RunRecord& r) { return r.judge_score; });
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

namespace {

constexpr const char* kDraftBanner =
    "# DRAFT hint (machine-generated) - verify against the record before use\n\n";

bool is_draft(const std::string& text) {
    return text.rfind("# DRAFT hint", 0) == 0;
}

std::string strip_draft_banner(const std::string& text) {
    if (!is_draft(text)) return text;
    const auto pos = text.find("\n\n");
    return pos == std::string::npos ? std::string() : text.substr(pos + 2);
}

// Returns the payload for the level, generating and persisting a draft when
// no usable file exists.  Never overwrites a file that lacks the draft
// banner: that is a human-verified payload.
std::string ensure_hint(backend::ChatBackend& backend, const std::string& model_label,
                        const pipeline::TemplateStore& templates, int level,
                        const tasks::HintMaterials& materials, const fs::path& out_dir,
                        int record_index, bool* written) {
    const fs::path path = tasks::hint_payload_path(out_dir, record_index, level);
    if (fs::exists(path)) {
        *written = false;
        return strip_draft_banner(util::read_file(path));
    }
    const std::string text =
        tasks::generate_hint(backend, model_label, templates, level, materials);
    util::write_file(path, std::string(kDraftBanner) + text + "\n");
    *written = true;
    return text;
}

}  // namespace

int cmd_gen_hints(const fs::path& manifest_path, int transition, int level,
                  const fs::path& backend_config, const std::optional<fs::path>& out_dir,
                  const std::string& model_label) {
    try {
        if (level < 1 || level > 3)
            throw std::invalid_argument("gen-hints: level must be 1, 2 or 3");
        const auto manifest = tasks::load_manifest(manifest_path);
        const auto all = tasks::transitions(manifest);
        if (transition < 1 || transition > static_cast<int>(all.size()))
            throw std::invalid_argument("gen-hints: no transition " + std::to_string(transition) +
                                        " (manifest has " + std::to_string(all.size()) + ")");
        const auto& t = all[static_cast<std::size_t>(transition - 1)];

        tasks::HintMaterials materials;
        materials.code = util::read_file(manifest.artifact_path(*t.prev));
        materials.next_code = util::read_file(manifest.artifact_path(*t.next));
        const fs::path material_dir =
            manifest.base_dir / "materials" / ("record_" + std::to_string(t.next->index));
        materials.changelog = util::read_file(material_dir / "changelog.txt");
        materials.diff = util::read_file(material_dir / "diff.patch");

        const json backend_json = json::parse(util::read_file(backend_config));
        auto backend =
            backend::make_backend(backend_json, fs::absolute(backend_config).parent_path());
        const auto templates = pipeline::TemplateStore::load_default();
        const fs::path target = out_dir ? *out_dir : manifest.hints_path();
        fs::create_directories(target);

        auto report = [&](int lvl, bool written) {
            const auto path = tasks::hint_payload_path(target, t.next->index, lvl);
            std::printf("%s %s\n", written ? "wrote draft" : "kept existing", path.c_str());
        };

        // level 3 consumes the level-1/2 texts, so materialize those first
        bool written = false;
        if (level == 1 || level == 3) {
            materials.pseudo_code = ensure_hint(*backend, model_label, templates, 1, materials,
                                                target, t.next->index, &written);
            report(1, written);
        }
        if (level == 2 || level == 3) {
            materials.text_description = ensure_hint(*backend, model_label, templates, 2,
                                                     materials, target, t.next->index, &written);
            report(2, written);
        }
        if (level == 3) {
            ensure_hint(*backend, model_label, templates, 3, materials, target, t.next->index,
                        &written);
            report(3, written);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace speedrun::cli
