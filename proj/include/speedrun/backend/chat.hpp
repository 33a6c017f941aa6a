#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace speedrun::backend {

struct ChatRequest {
    std::string model_id;
    std::optional<std::string> system;  // optional system prompt
    std::string user;                   // must be non-empty
    int max_output_tokens = 4096;
    double temperature = 0.0;
};

enum class ErrorKind {
    outage,       // transport failure / server error after retries
    mock_miss,    // scripted backend has no entry for this prompt
    bad_request,  // caller violated a precondition
    bad_response, // server replied but the payload was unusable
};

class BackendError : public std::runtime_error {
public:
    BackendError(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// A chat + embedding provider.  Implementations must be safe to call from
// multiple threads.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    // Returns the assistant text for the request.  Throws BackendError.
    virtual std::string chat(const ChatRequest& request) = 0;

    // Returns an embedding vector for the text.  The dimension is constant
    // for a given backend instance.  Throws BackendError.
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// The prompt text a backend keys on: the system prompt (when present)
// separated from the user prompt by a blank line, otherwise just the user
// prompt.
std::string full_prompt_text(const ChatRequest& request);

}  // namespace speedrun::backend
