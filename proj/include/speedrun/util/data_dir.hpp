#pragma once

#include <filesystem>

namespace speedrun::util {

// Locates the bundled data directory (prompt templates, benchmark manifest,
// simulated task fixtures).  Resolution order:
//   1. $SPEEDRUN_DATA_DIR if set,
//   2. the source-tree data/ directory baked in at build time,
//   3. ./data relative to the current working directory.
// Throws std::runtime_error if none of these exists.
std::filesystem::path data_dir();

}  // namespace speedrun::util
