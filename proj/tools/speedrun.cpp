#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "speedrun/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"agentic speedrun benchmark harness"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "run one search from a config file");
    run->add_option("--config", config, "run config JSON")->required();
    std::uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "override the config's seed");

    std::string grid;
    int parallel = 1;
    auto* grid_cmd = app.add_subcommand("grid", "run a benchmark grid");
    grid_cmd->add_option("--grid", grid, "grid spec JSON")->required();
    grid_cmd->add_option("--parallel", parallel, "concurrent searches")->default_val(1);

    std::string root;
    std::vector<std::string> group_by;
    std::string format = "csv";
    std::string out_dir;
    int resamples = 2000;
    double level = 0.95;
    auto* report = app.add_subcommand("report", "aggregate run records under a directory");
    report->add_option("root", root, "results root")->required();
    report->add_option("--group-by", group_by, "grouping keys: model scaffold hints record");
    report->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--out", out_dir, "output directory (default: results root)");
    report->add_option("--resamples", resamples, "bootstrap resamples");
    report->add_option("--level", level, "confidence level");

    std::string manifest;
    int transition = 0;
    int hint_level = 1;
    std::string backend_config;
    std::string hints_out;
    std::string model_label = "hint-writer";
    auto* gen = app.add_subcommand("gen-hints", "draft hint files for one record transition");
    gen->add_option("--manifest", manifest, "record manifest JSON")->required();
    gen->add_option("--transition", transition, "1-based transition index")->required();
    gen->add_option("--level", hint_level, "hint level (1-3)")->required();
    gen->add_option("--backend", backend_config, "backend config JSON")->required();
    gen->add_option("--out", hints_out, "output directory (default: manifest hints dir)");
    gen->add_option("--model", model_label, "model id sent to the backend");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (seed_opt->count() > 0) seed = seed_value;
        return speedrun::cli::cmd_run(config, seed);
    }
    if (grid_cmd->parsed()) return speedrun::cli::cmd_grid(grid, parallel);
    if (report->parsed()) {
        const std::filesystem::path out = out_dir.empty() ? root : out_dir;
        return speedrun::cli::cmd_report(root, group_by, format, out, resamples, level);
    }
    if (gen->parsed()) {
        std::optional<std::filesystem::path> out;
        if (!hints_out.empty()) out = hints_out;
        return speedrun::cli::cmd_gen_hints(manifest, transition, hint_level, backend_config, out,
                                            model_label);
    }
    return 1;
}
