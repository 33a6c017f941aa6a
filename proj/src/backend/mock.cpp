#include "speedrun/backend/mock.hpp"

#include <nlohmann/json.hpp>

#include "speedrun/backend/digest.hpp"
#include "speedrun/util/io.hpp"

namespace speedrun::backend {

std::string full_prompt_text(const ChatRequest& request) {
    if (request.system) return *request.system + "\n\n" + request.user;
    return request.user;
}

void MockScript::add(std::string_view prompt, std::string response) {
    responses[digest(prompt)] = std::move(response);
}

MockScript MockScript::from_json_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(util::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendError(ErrorKind::bad_request,
                           "mock script " + path.string() + ": " + e.what());
    }
    MockScript script;
    if (j.contains("responses")) {
        for (auto& [key, value] : j.at("responses").items()) {
            if (!value.is_string()) {
                throw BackendError(ErrorKind::bad_request, "mock script " + path.string() +
                                                               ": responses." + key +
                                                               " must be a string");
            }
            script.responses[key] = value.get<std::string>();
        }
    }
    if (j.contains("default")) {
        script.default_response = j.at("default").get<std::string>();
    }
    return script;
}

MockBackend::MockBackend(MockScript script, std::size_t embed_dim, std::uint64_t embed_seed)
    : script_(std::move(script)), embed_dim_(embed_dim), embed_seed_(embed_seed) {
    if (embed_dim_ == 0) {
        throw BackendError(ErrorKind::bad_request, "embed_dim must be positive");
    }
}

std::string MockBackend::chat(const ChatRequest& request) {
    if (request.user.empty()) {
        throw BackendError(ErrorKind::bad_request, "chat request has empty user prompt");
    }
    const std::string key = digest(full_prompt_text(request));
    auto it = script_.responses.find(key);
    if (it != script_.responses.end()) return it->second;
    if (script_.default_response) return *script_.default_response;
    throw BackendError(ErrorKind::mock_miss,
                       "no scripted response for prompt digest " + key);
}

std::vector<double> MockBackend::embed(const std::string& text) {
    if (text.empty()) {
        throw BackendError(ErrorKind::bad_request, "embed text must be non-empty");
    }
    // Hash-projection embedding: component i is a deterministic function of
    // (text, seed, i), mapped into [-1, 1].
    std::vector<double> out(embed_dim_);
    const std::uint64_t base = fnv1a64(text);
    for (std::size_t i = 0; i < embed_dim_; ++i) {
        std::uint64_t h = base ^ (embed_seed_ + 0x9e3779b97f4a7c15ull * (i + 1));
        // xorshift-style mix so nearby i produce unrelated components
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
        h *= 0xc4ceb9fe1a85ec53ull;
        h ^= h >> 33;
        out[i] = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    return out;
}

}  // namespace speedrun::backend
