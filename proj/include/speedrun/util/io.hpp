#pragma once

#include <filesystem>
#include <string>

namespace speedrun::util {

// Reads the whole file as bytes. Throws std::runtime_error (with the path in
// the message) if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes text to path, creating parent directories as needed. Throws
// std::runtime_error on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace speedrun::util
