#pragma once

#include <memory>
#include <mutex>
#include <condition_variable>

#include <nlohmann/json.hpp>

#include "speedrun/backend/chat.hpp"

namespace speedrun::backend {

// Connection settings for an OpenAI-compatible chat/embeddings service.
// Credentials are never stored here, only the NAME of the environment
// variable that holds the API key; to_json round-trips the name, never the
// value.
struct HttpConfig {
    std::string endpoint;  // base URL, e.g. "http://127.0.0.1:8089"
    std::string chat_path = "/v1/chat/completions";
    std::string embed_path = "/v1/embeddings";
    std::string embed_model;            // optional; defaults to the chat model
    std::string credentials_env;        // name of env var holding the bearer token ("" = none)
    double request_timeout_s = 120.0;
    int max_retries = 3;                // retries after the first attempt
    double backoff_base_s = 1.0;        // sleep base: base * 2^attempt
    int max_in_flight = 4;

    static HttpConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpConfig config);
    ~HttpBackend() override;

    std::string chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override;

    // Total HTTP requests issued (including retries); for tests.
    int requests_sent() const;

private:
    std::string post_json(const std::string& path, const std::string& body);

    HttpConfig config_;
    std::string bearer_;  // resolved once from the environment

    mutable std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    int requests_sent_ = 0;
    std::size_t embed_dim_ = 0;  // fixed by the first successful embed
};

}  // namespace speedrun::backend
