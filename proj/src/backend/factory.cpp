#include "speedrun/backend/factory.hpp"

#include "speedrun/backend/http.hpp"
#include "speedrun/backend/mock.hpp"

namespace speedrun::backend {

using nlohmann::json;

std::unique_ptr<ChatBackend> make_backend(const json& config,
                                          const std::filesystem::path& base_dir) {
    if (!config.is_object() || !config.contains("type")) {
        throw BackendError(ErrorKind::bad_request, "backend config: type is required");
    }
    const std::string type = config.at("type").get<std::string>();
    if (type == "mock") {
        MockScript script;
        if (config.contains("script")) {
            std::filesystem::path p = config.at("script").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            script = MockScript::from_json_file(p);
        }
        if (config.contains("default")) {
            script.default_response = config.at("default").get<std::string>();
        }
        std::size_t dim = config.value("embed_dim", 16u);
        std::uint64_t seed = config.value("embed_seed", 0u);
        return std::make_unique<MockBackend>(std::move(script), dim, seed);
    }
    if (type == "http") {
        return std::make_unique<HttpBackend>(HttpConfig::from_json(config));
    }
    throw BackendError(ErrorKind::bad_request, "backend config: unknown type '" + type + "'");
}

}  // namespace speedrun::backend
