#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "speedrun/backend/chat.hpp"

namespace speedrun::backend {

// A scripted response table: prompt digest -> canned response.  Scripts can
// be built in code (add() hashes the prompt for you) or loaded from a JSON
// file of the shape
//   {"responses": {"<16-hex-digest>": "text", ...}, "default": "text"?}
struct MockScript {
    std::map<std::string, std::string> responses;
    std::optional<std::string> default_response;

    // Registers a response for the given full prompt text.
    void add(std::string_view prompt, std::string response);

    static MockScript from_json_file(const std::filesystem::path& path);
};

// Deterministic offline backend: chat() looks the full prompt digest up in
// the script; embed() derives a pseudo-embedding from a hash of the text, so
// identical text always embeds identically.
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(MockScript script, std::size_t embed_dim = 16,
                         std::uint64_t embed_seed = 0);

    std::string chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override;

private:
    MockScript script_;
    std::size_t embed_dim_;
    std::uint64_t embed_seed_;
};

}  // namespace speedrun::backend
