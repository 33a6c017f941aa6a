#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace speedrun::tasks {

// Runtimes are stored as integer deciseconds (seconds x 10) so record times
// compare exactly; manifests carry decimal seconds and are rounded on load.
std::int64_t deciseconds_from_seconds(double seconds);
double seconds(std::int64_t deciseconds);

struct RecordEntry {
    int index = 0;             // 1-based position in the record progression
    std::string artifact;      // path to the record's solution, relative to the manifest
    std::int64_t time_ds = 0;  // measured runtime, deciseconds
    std::string description;
    std::string category;
    bool excluded = false;     // e.g. environment-only changes with no code diff
};

struct RecordManifest {
    std::filesystem::path base_dir;  // directory containing the manifest file
    std::vector<RecordEntry> records;
    std::optional<std::string> hints_dir;  // relative to base_dir

    const RecordEntry* by_index(int index) const;  // nullptr when absent
    std::filesystem::path artifact_path(const RecordEntry& entry) const;
    std::filesystem::path hints_path() const;  // throws when hints_dir unset
};

// Parses a manifest JSON file:
//   {"records": [{"index", "artifact", "time_s", "description", "category"?,
//                 "excluded"?}, ...], "hints_dir"?}
// Validation failures name the offending field (e.g. "records[3].time_s").
// Indices must be strictly increasing, times positive, and at least two
// records non-excluded (otherwise there is no transition to attempt).
RecordManifest load_manifest(const std::filesystem::path& path);

// A record-to-record improvement an agent can be asked to reproduce: the
// pair of consecutive non-excluded records.  Excluded records are bridged,
// so their neighbors form one transition.
struct Transition {
    int position = 0;  // 1-based index over the transition list
    const RecordEntry* prev = nullptr;
    const RecordEntry* next = nullptr;
};

// All transitions, in record order.  Pointers alias the manifest's records.
std::vector<Transition> transitions(const RecordManifest& manifest);

}  // namespace speedrun::tasks
