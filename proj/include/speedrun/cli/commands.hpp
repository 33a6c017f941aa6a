#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "speedrun/search/types.hpp"

namespace speedrun::cli {

// Cross product of benchmark settings; one search per cell.
struct GridSpec {
    std::filesystem::path manifest_path;
    std::vector<int> records;                  // transition indices
    std::vector<std::set<int>> hint_regimes;   // hint-level subsets, {0} = none
    std::vector<search::ScaffoldKind> scaffolds;
    std::vector<std::string> models;           // backend config names
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_root;

    // Shared per-cell settings.
    nlohmann::json search_defaults;            // n0 / n / p_debug / d_max / ...
    nlohmann::json backends;                   // name -> backend config
    nlohmann::json adapter;                    // execution adapter config
    std::vector<std::string> packages;
    std::string task_description;
    std::string goal;
    bool similarity = false;

    // Parses the grid JSON (schema in the README).  Relative paths resolve
    // against base_dir.  All cross-product lists must be non-empty.
    static GridSpec from_json_file(const std::filesystem::path& path);
};

struct GridResult {
    int total = 0;
    int executed = 0;
    int skipped = 0;  // done-marker already present
    std::vector<std::pair<std::string, std::string>> failures;  // cell name -> cause
};

// Runs every cell missing a done-marker, at most `parallel` at a time.  Cell
// failures are recorded and the grid continues.
GridResult run_grid(const GridSpec& spec, int parallel);

// The directory name of one grid cell, e.g. "r03_h1-2-3_AIDE_mock_s0".
std::string cell_name(int record, const std::set<int>& hints, search::ScaffoldKind scaffold,
                      const std::string& model, std::uint64_t seed);

// CLI entry points; each returns a process exit status (0 = success) and
// reports errors as one-line messages on stderr.
int cmd_run(const std::filesystem::path& config_path,
            const std::optional<std::uint64_t>& seed_override);
int cmd_grid(const std::filesystem::path& grid_path, int parallel);
int cmd_report(const std::filesystem::path& results_root, const std::vector<std::string>& group_by,
               const std::string& format, const std::filesystem::path& out_dir, int resamples,
               double level);
int cmd_gen_hints(const std::filesystem::path& manifest_path, int transition, int level,
                  const std::filesystem::path& backend_config,
                  const std::optional<std::filesystem::path>& out_dir,
                  const std::string& model_label);

}  // namespace speedrun::cli
