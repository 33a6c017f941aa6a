#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "speedrun/eval/stats.hpp"

namespace speedrun::eval {

// Outcome summary of one search run, as persisted in run_record.json.
struct RunRecord {
    std::string model_id;
    std::string scaffold;          // variant name, e.g. "AIDE"
    std::vector<int> hint_levels;  // {0} = no hints
    int record_index = 0;          // transition index the run targeted
    std::uint64_t seed = 0;
    double fsr = 0;
    // Fractions of expanded nodes by class; keys "buggy", "improved",
    // "unimproved".  Must lie in [0,1] and sum to 1 (±1e-9).
    std::map<std::string, double> node_fractions;
    std::optional<double> distance_recovered;
    std::optional<double> judge_score;
    std::optional<double> best_time_s;      // best wall time found (if any node won)
    std::optional<double> baseline_time_s;  // the starting record's time

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

// "1+2+3" for {1,2,3}; "0" for no hints.
std::string hint_label(const std::vector<int>& levels);

enum class GroupKey { model, scaffold, hints, record };

GroupKey parse_group_key(const std::string& name);  // throws on unknown name
std::string group_key_name(GroupKey key);

struct ReportRow {
    std::map<std::string, std::string> group;  // key name -> value label
    int n = 0;
    double fsr_mean = 0;            // raw FSR
    double fsr_mean_clamped = 0;    // FSR clamped to [0,1] before averaging
    std::optional<double> fsr_iqm;  // present when n >= 4
    std::optional<double> fsr_iqm_clamped;
    Interval ci;  // over clamped FSR; statistic = iqm when n >= 4, else mean
    double frac_buggy = 0;
    double frac_improved = 0;
    double frac_unimproved = 0;
    std::optional<double> distance_recovered_mean;
    std::optional<double> judge_score_mean;
};

// Groups records by the given keys (empty = one overall row) and reduces each
// group.  Rows come back sorted by their group labels.  params.statistic is
// ignored; the statistic is iqm when a group has >= 4 runs, else mean.
std::vector<ReportRow> aggregate(const std::vector<RunRecord>& records,
                                 const std::vector<GroupKey>& keys,
                                 const BootstrapParams& params);

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows,
                      const std::vector<GroupKey>& keys);
void write_report_json(const std::filesystem::path& path, const std::vector<ReportRow>& rows);

// Plot-ready CSVs (one row per bar / stack / point).
void write_fsr_bars_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
void write_node_fraction_stacks_csv(const std::filesystem::path& path,
                                    const std::vector<ReportRow>& rows);
void write_scatter_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records);

// Cumulative chain plot: per link, the measured time and the speedup over
// the chain's starting time.
void write_cumulative_csv(const std::filesystem::path& path, double base_s,
                          const std::vector<std::pair<std::string, double>>& link_times);

}  // namespace speedrun::eval
