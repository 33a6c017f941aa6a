#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "speedrun/backend/chat.hpp"

namespace speedrun::backend {

// Builds a backend from a JSON description:
//   {"type": "mock", "script": "path/to/script.json"?, "default": "text"?,
//    "embed_dim": 16?, "embed_seed": 0?}
//   {"type": "http", "endpoint": "...", ...}      (see HttpConfig)
// Relative script paths resolve against base_dir.
std::unique_ptr<ChatBackend> make_backend(const nlohmann::json& config,
                                          const std::filesystem::path& base_dir);

}  // namespace speedrun::backend
