#include "speedrun/tasks/manifest.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "speedrun/util/io.hpp"

namespace speedrun::tasks {

using nlohmann::json;

std::int64_t deciseconds_from_seconds(double s) {
    if (!(s > 0) || !std::isfinite(s)) {
        throw std::invalid_argument("time must be positive and finite");
    }
    return std::llround(s * 10.0);
}

double seconds(std::int64_t ds) { return static_cast<double>(ds) / 10.0; }

const RecordEntry* RecordManifest::by_index(int index) const {
    for (const auto& r : records) {
        if (r.index == index) return &r;
    }
    return nullptr;
}

std::filesystem::path RecordManifest::artifact_path(const RecordEntry& entry) const {
    std::filesystem::path p(entry.artifact);
    return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path RecordManifest::hints_path() const {
    if (!hints_dir) {
        throw std::runtime_error("manifest does not declare a hints_dir");
    }
    std::filesystem::path p(*hints_dir);
    return p.is_absolute() ? p : base_dir / p;
}

namespace {

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
    throw std::runtime_error("record manifest: " + field + ": " + why);
}

}  // namespace

RecordManifest load_manifest(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("record manifest " + path.string() + ": " + e.what());
    }

    RecordManifest manifest;
    manifest.base_dir = path.has_parent_path() ? path.parent_path() : ".";

    if (!j.is_object() || !j.contains("records") || !j.at("records").is_array()) {
        fail_field("records", "required array is missing");
    }
    if (j.contains("hints_dir")) {
        if (!j.at("hints_dir").is_string()) fail_field("hints_dir", "must be a string");
        manifest.hints_dir = j.at("hints_dir").get<std::string>();
    }

    int prev_index = 0;
    std::size_t pos = 0;
    for (const auto& rec : j.at("records")) {
        const std::string where = "records[" + std::to_string(pos) + "]";
        ++pos;
        RecordEntry entry;
        if (!rec.is_object()) fail_field(where, "must be an object");
        if (!rec.contains("index") || !rec.at("index").is_number_integer()) {
            fail_field(where + ".index", "required integer is missing");
        }
        entry.index = rec.at("index").get<int>();
        if (entry.index <= prev_index) {
            fail_field(where + ".index", "indices must be strictly increasing");
        }
        prev_index = entry.index;
        if (!rec.contains("artifact") || !rec.at("artifact").is_string()) {
            fail_field(where + ".artifact", "required string is missing");
        }
        entry.artifact = rec.at("artifact").get<std::string>();
        if (!rec.contains("time_s") || !rec.at("time_s").is_number()) {
            fail_field(where + ".time_s", "required number is missing");
        }
        const double time_s = rec.at("time_s").get<double>();
        if (!(time_s > 0)) fail_field(where + ".time_s", "must be positive");
        entry.time_ds = deciseconds_from_seconds(time_s);
        if (!rec.contains("description") || !rec.at("description").is_string()) {
            fail_field(where + ".description", "required string is missing");
        }
        entry.description = rec.at("description").get<std::string>();
        if (rec.contains("category")) entry.category = rec.at("category").get<std::string>();
        if (rec.contains("excluded")) {
            if (!rec.at("excluded").is_boolean()) fail_field(where + ".excluded", "must be a boolean");
            entry.excluded = rec.at("excluded").get<bool>();
        }
        manifest.records.push_back(std::move(entry));
    }

    int usable = 0;
    for (const auto& r : manifest.records) {
        if (!r.excluded) ++usable;
    }
    if (usable < 2) {
        fail_field("records", "need at least two non-excluded records to form a transition");
    }
    return manifest;
}

std::vector<Transition> transitions(const RecordManifest& manifest) {
    std::vector<Transition> out;
    const RecordEntry* prev = nullptr;
    for (const auto& r : manifest.records) {
        if (r.excluded) continue;  // bridge over excluded records
        if (prev) {
            Transition t;
            t.position = static_cast<int>(out.size()) + 1;
            t.prev = prev;
            t.next = &r;
            out.push_back(t);
        }
        prev = &r;
    }
    return out;
}

}  // namespace speedrun::tasks
