#include "speedrun/backend/http.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace speedrun::backend {

using nlohmann::json;

HttpConfig HttpConfig::from_json(const json& j) {
    HttpConfig c;
    if (!j.contains("endpoint") || !j.at("endpoint").is_string()) {
        throw BackendError(ErrorKind::bad_request, "backend config: endpoint (string) is required");
    }
    c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("chat_path")) c.chat_path = j.at("chat_path").get<std::string>();
    if (j.contains("embed_path")) c.embed_path = j.at("embed_path").get<std::string>();
    if (j.contains("embed_model")) c.embed_model = j.at("embed_model").get<std::string>();
    if (j.contains("credentials_env")) c.credentials_env = j.at("credentials_env").get<std::string>();
    if (j.contains("request_timeout_s")) c.request_timeout_s = j.at("request_timeout_s").get<double>();
    if (j.contains("max_retries")) c.max_retries = j.at("max_retries").get<int>();
    if (j.contains("backoff_base_s")) c.backoff_base_s = j.at("backoff_base_s").get<double>();
    if (j.contains("max_in_flight")) c.max_in_flight = j.at("max_in_flight").get<int>();
    if (c.request_timeout_s <= 0) {
        throw BackendError(ErrorKind::bad_request, "backend config: request_timeout_s must be positive");
    }
    if (c.max_retries < 0) {
        throw BackendError(ErrorKind::bad_request, "backend config: max_retries must be >= 0");
    }
    if (c.backoff_base_s < 0) {
        throw BackendError(ErrorKind::bad_request, "backend config: backoff_base_s must be >= 0");
    }
    if (c.max_in_flight < 1) {
        throw BackendError(ErrorKind::bad_request, "backend config: max_in_flight must be >= 1");
    }
    return c;
}

json HttpConfig::to_json() const {
    return json{{"endpoint", endpoint},
                {"chat_path", chat_path},
                {"embed_path", embed_path},
                {"embed_model", embed_model},
                {"credentials_env", credentials_env},
                {"request_timeout_s", request_timeout_s},
                {"max_retries", max_retries},
                {"backoff_base_s", backoff_base_s},
                {"max_in_flight", max_in_flight}};
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (!config_.credentials_env.empty()) {
        const char* v = std::getenv(config_.credentials_env.c_str());
        if (!v || !*v) {
            throw BackendError(ErrorKind::bad_request,
                               "credentials env var is not set: " + config_.credentials_env);
        }
        bearer_ = v;
    }
}

HttpBackend::~HttpBackend() = default;

int HttpBackend::requests_sent() const {
    std::lock_guard<std::mutex> lock(mu_);
    return requests_sent_;
}

namespace {

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status <= 599);
}

class InFlightSlot {
public:
    InFlightSlot(std::mutex& mu, std::condition_variable& cv, int& count, int limit)
        : mu_(mu), cv_(cv), count_(count) {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return count_ < limit; });
        ++count_;
    }
    ~InFlightSlot() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --count_;
        }
        cv_.notify_one();
    }

private:
    std::mutex& mu_;
    std::condition_variable& cv_;
    int& count_;
};

}  // namespace

std::string HttpBackend::post_json(const std::string& path, const std::string& body) {
    InFlightSlot slot(mu_, cv_, in_flight_, config_.max_in_flight);

    httplib::Client client(config_.endpoint);
    const auto timeout_ms =
        std::chrono::milliseconds(static_cast<long long>(config_.request_timeout_s * 1000));
    client.set_connection_timeout(timeout_ms);
    client.set_read_timeout(timeout_ms);
    client.set_write_timeout(timeout_ms);
    httplib::Headers headers;
    if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0 && config_.backoff_base_s > 0) {
            const double sleep_s = config_.backoff_base_s * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++requests_sent_;
        }
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        // Error messages must never echo request headers (the bearer token).
        last_error = "HTTP " + std::to_string(res->status) + " from " + path;
        if (!retryable_status(res->status)) {
            throw BackendError(ErrorKind::outage, last_error);
        }
    }
    throw BackendError(ErrorKind::outage,
                       last_error + " (after " + std::to_string(config_.max_retries + 1) +
                           " attempts)");
}

std::string HttpBackend::chat(const ChatRequest& request) {
    if (request.user.empty()) {
        throw BackendError(ErrorKind::bad_request, "chat request has empty user prompt");
    }
    json messages = json::array();
    if (request.system) {
        messages.push_back({{"role", "system"}, {"content", *request.system}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user}});
    json payload{{"model", request.model_id},
                 {"messages", messages},
                 {"max_tokens", request.max_output_tokens},
                 {"temperature", request.temperature}};

    const std::string body = post_json(config_.chat_path, payload.dump());
    try {
        json j = json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(ErrorKind::bad_response,
                           std::string("malformed chat response: ") + e.what());
    }
}

std::vector<double> HttpBackend::embed(const std::string& text) {
    if (text.empty()) {
        throw BackendError(ErrorKind::bad_request, "embed text must be non-empty");
    }
    const std::string model = config_.embed_model;
    json payload{{"model", model}, {"input", text}};
    const std::string body = post_json(config_.embed_path, payload.dump());
    std::vector<double> out;
    try {
        json j = json::parse(body);
        out = j.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw BackendError(ErrorKind::bad_response,
                           std::string("malformed embedding response: ") + e.what());
    }
    if (out.empty()) {
        throw BackendError(ErrorKind::bad_response, "embedding response has zero dimension");
    }
    std::lock_guard<std::mutex> lock(mu_);
    if (embed_dim_ == 0) {
        embed_dim_ = out.size();
    } else if (embed_dim_ != out.size()) {
        throw BackendError(ErrorKind::bad_response,
                           "embedding dimension changed between calls: " +
                               std::to_string(embed_dim_) + " vs " + std::to_string(out.size()));
    }
    return out;
}

}  // namespace speedrun::backend
