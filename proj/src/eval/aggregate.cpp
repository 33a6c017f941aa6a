#include "speedrun/eval/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "speedrun/util/io.hpp"

namespace speedrun::eval {

using nlohmann::json;

namespace {

const char* kFractionKeys[] = {"buggy", "improved", "unimproved"};

void validate_fractions(const std::map<std::string, double>& fractions) {
    double sum = 0;
    for (const char* key : kFractionKeys) {
        auto it = fractions.find(key);
        if (it == fractions.end()) {
            throw std::invalid_argument(std::string("run record: node_fractions missing '") +
                                        key + "'");
        }
        if (it->second < 0 || it->second > 1) {
            throw std::invalid_argument(std::string("run record: node_fractions['") + key +
                                        "'] out of [0,1]");
        }
        sum += it->second;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("run record: node_fractions must sum to 1");
    }
}

}  // namespace

json RunRecord::to_json() const {
    json j{{"model", model_id},
           {"scaffold", scaffold},
           {"hints", hint_levels},
           {"record", record_index},
           {"seed", seed},
           {"fsr", fsr},
           {"node_fractions", node_fractions}};
    if (distance_recovered) j["distance_recovered"] = *distance_recovered;
    if (judge_score) j["judge_score"] = *judge_score;
    if (best_time_s) j["best_time_s"] = *best_time_s;
    if (baseline_time_s) j["baseline_time_s"] = *baseline_time_s;
    return j;
}

RunRecord RunRecord::from_json(const json& j) {
    RunRecord r;
    r.model_id = j.at("model").get<std::string>();
    r.scaffold = j.at("scaffold").get<std::string>();
    r.hint_levels = j.at("hints").get<std::vector<int>>();
    r.record_index = j.at("record").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.fsr = j.at("fsr").get<double>();
    if (!std::isfinite(r.fsr)) throw std::invalid_argument("run record: fsr must be finite");
    r.node_fractions = j.at("node_fractions").get<std::map<std::string, double>>();
    validate_fractions(r.node_fractions);
    if (j.contains("distance_recovered")) r.distance_recovered = j.at("distance_recovered").get<double>();
    if (j.contains("judge_score")) r.judge_score = j.at("judge_score").get<double>();
    if (j.contains("best_time_s")) r.best_time_s = j.at("best_time_s").get<double>();
    if (j.contains("baseline_time_s")) r.baseline_time_s = j.at("baseline_time_s").get<double>();
    return r;
}

std::string hint_label(const std::vector<int>& levels) {
    if (levels.empty()) return "0";
    std::vector<int> sorted = levels;
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i) out << "+";
        out << sorted[i];
    }
    return out.str();
}

GroupKey parse_group_key(const std::string& name) {
    if (name == "model") return GroupKey::model;
    if (name == "scaffold") return GroupKey::scaffold;
    if (name == "hints") return GroupKey::hints;
    if (name == "record") return GroupKey::record;
    throw std::invalid_argument("unknown group key: " + name +
                                " (expected model, scaffold, hints or record)");
}

std::string group_key_name(GroupKey key) {
    switch (key) {
        case GroupKey::model: return "model";
        case GroupKey::scaffold: return "scaffold";
        case GroupKey::hints: return "hints";
        case GroupKey::record: return "record";
    }
    throw std::logic_error("bad group key");
}

namespace {

std::string key_value(const RunRecord& r, GroupKey key) {
    switch (key) {
        case GroupKey::model: return r.model_id;
        case GroupKey::scaffold: return r.scaffold;
        case GroupKey::hints: return hint_label(r.hint_levels);
        case GroupKey::record: return std::to_string(r.record_index);
    }
    throw std::logic_error("bad group key");
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string opt_cell(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream out;
    out.precision(12);
    out << *v;
    return out.str();
}

std::string num_cell(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

std::string row_label(const ReportRow& row) {
    if (row.group.empty()) return "all";
    std::ostringstream out;
    bool first = true;
    for (const auto& [k, v] : row.group) {
        if (!first) out << "/";
        out << v;
        first = false;
    }
    return out.str();
}

}  // namespace

std::vector<ReportRow> aggregate(const std::vector<RunRecord>& records,
                                 const std::vector<GroupKey>& keys,
                                 const BootstrapParams& params) {
    if (records.empty()) throw std::invalid_argument("aggregate: no run records");
    for (const auto& r : records) {
        if (!std::isfinite(r.fsr)) throw std::invalid_argument("aggregate: non-finite fsr");
        validate_fractions(r.node_fractions);
    }

    std::map<std::vector<std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) {
        std::vector<std::string> label;
        label.reserve(keys.size());
        for (GroupKey k : keys) label.push_back(key_value(r, k));
        groups[label].push_back(&r);
    }

    std::vector<ReportRow> rows;
    rows.reserve(groups.size());
    for (const auto& [label, members] : groups) {
        ReportRow row;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            row.group[group_key_name(keys[i])] = label[i];
        }
        row.n = static_cast<int>(members.size());

        std::vector<double> raw, clamped, dist, judge;
        double buggy = 0, improved = 0, unimproved = 0;
        for (const RunRecord* r : members) {
            raw.push_back(r->fsr);
            clamped.push_back(clamp01(r->fsr));
            buggy += r->node_fractions.at("buggy");
            improved += r->node_fractions.at("improved");
            unimproved += r->node_fractions.at("unimproved");
            if (r->distance_recovered) dist.push_back(*r->distance_recovered);
            if (r->judge_score) judge.push_back(*r->judge_score);
        }
        const auto n = static_cast<double>(members.size());
        row.fsr_mean = mean_fsr(raw);
        row.fsr_mean_clamped = mean_fsr(clamped);
        if (members.size() >= 4) {
            row.fsr_iqm = iqm(raw);
            row.fsr_iqm_clamped = iqm(clamped);
        }
        BootstrapParams p = params;
        p.statistic = members.size() >= 4 ? Statistic::iqm : Statistic::mean;
        row.ci = bootstrap_ci(clamped, p);
        row.frac_buggy = buggy / n;
        row.frac_improved = improved / n;
        row.frac_unimproved = unimproved / n;
        row.distance_recovered_mean = mean_of(dist);
        row.judge_score_mean = mean_of(judge);
        rows.push_back(std::move(row));
    }
    return rows;  // std::map iteration already sorted by group labels
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows,
                      const std::vector<GroupKey>& keys) {
    std::ostringstream out;
    for (GroupKey k : keys) out << group_key_name(k) << ",";
    out << "n,fsr_mean,fsr_mean_clamped,fsr_iqm,fsr_iqm_clamped,ci_lo,ci_hi,ci_level,"
           "frac_buggy,frac_improved,frac_unimproved,distance_recovered_mean,judge_score_mean\n";
    for (const auto& row : rows) {
        for (GroupKey k : keys) out << csv_escape(row.group.at(group_key_name(k))) << ",";
        out << row.n << "," << num_cell(row.fsr_mean) << "," << num_cell(row.fsr_mean_clamped)
            << "," << opt_cell(row.fsr_iqm) << "," << opt_cell(row.fsr_iqm_clamped) << ","
            << num_cell(row.ci.lo) << "," << num_cell(row.ci.hi) << "," << num_cell(row.ci.level)
            << "," << num_cell(row.frac_buggy) << "," << num_cell(row.frac_improved) << ","
            << num_cell(row.frac_unimproved) << "," << opt_cell(row.distance_recovered_mean)
            << "," << opt_cell(row.judge_score_mean) << "\n";
    }
    util::write_file(path, out.str());
}

void write_report_json(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json j{{"group", row.group},
               {"n", row.n},
               {"fsr_mean", row.fsr_mean},
               {"fsr_mean_clamped", row.fsr_mean_clamped},
               {"ci", {{"lo", row.ci.lo}, {"hi", row.ci.hi}, {"level", row.ci.level}}},
               {"frac_buggy", row.frac_buggy},
               {"frac_improved", row.frac_improved},
               {"frac_unimproved", row.frac_unimproved}};
        j["fsr_iqm"] = row.fsr_iqm ? json(*row.fsr_iqm) : json(nullptr);
        j["fsr_iqm_clamped"] = row.fsr_iqm_clamped ? json(*row.fsr_iqm_clamped) : json(nullptr);
        j["distance_recovered_mean"] =
            row.distance_recovered_mean ? json(*row.distance_recovered_mean) : json(nullptr);
        j["judge_score_mean"] = row.judge_score_mean ? json(*row.judge_score_mean) : json(nullptr);
        arr.push_back(std::move(j));
    }
    util::write_file(path, arr.dump(2) + "\n");
}

void write_fsr_bars_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "label,n,fsr_mean_clamped,fsr_iqm_clamped,ci_lo,ci_hi\n";
    for (const auto& row : rows) {
        out << csv_escape(row_label(row)) << "," << row.n << ","
            << num_cell(row.fsr_mean_clamped) << "," << opt_cell(row.fsr_iqm_clamped) << ","
            << num_cell(row.ci.lo) << "," << num_cell(row.ci.hi) << "\n";
    }
    util::write_file(path, out.str());
}

void write_node_fraction_stacks_csv(const std::filesystem::path& path,
                                    const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "label,buggy,improved,unimproved\n";
    for (const auto& row : rows) {
        out << csv_escape(row_label(row)) << "," << num_cell(row.frac_buggy) << ","
            << num_cell(row.frac_improved) << "," << num_cell(row.frac_unimproved) << "\n";
    }
    util::write_file(path, out.str());
}

void write_scatter_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "model,scaffold,hints,record,seed,fsr,distance_recovered,judge_score\n";
    for (const auto& r : records) {
        out << csv_escape(r.model_id) << "," << csv_escape(r.scaffold) << ","
            << hint_label(r.hint_levels) << "," << r.record_index << "," << r.seed << ","
            << num_cell(r.fsr) << "," << opt_cell(r.distance_recovered) << ","
            << opt_cell(r.judge_score) << "\n";
    }
    util::write_file(path, out.str());
}

void write_cumulative_csv(const std::filesystem::path& path, double base_s,
                          const std::vector<std::pair<std::string, double>>& link_times) {
    std::vector<double> times;
    times.reserve(link_times.size());
    for (const auto& [_, t] : link_times) times.push_back(t);
    const std::vector<double> speedups = cumulative_speedup(base_s, times);
    std::ostringstream out;
    out << "link,time_s,speedup\n";
    for (std::size_t i = 0; i < link_times.size(); ++i) {
        out << csv_escape(link_times[i].first) << "," << num_cell(link_times[i].second) << ","
            << num_cell(speedups[i]) << "\n";
    }
    util::write_file(path, out.str());
}

}  // namespace speedrun::eval
