#pragma once

#include "proofread/error.hpp"
#include "proofread/http.hpp"
#include "proofread/injection.hpp"
#include "proofread/prompt.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace proofread {

struct GenerationParams {
    int max_new_tokens = 300;
    double temperature = 0.001;
    double top_p = 0.8;
    bool sampling = true;

    bool operator==(const GenerationParams&) const = default;
};

struct ChatRequest {
    std::string case_id;
    Stage stage = Stage::Detect;
    std::string prompt;       // rendered PromptBundle, plus a reminder on retries
    std::string report_text;  // the report under review, for mock backends
    GenerationParams params;
    int call = 0;             // 0 first try, 1 reminder retry
};

struct ChatAttempt {
    int attempt = 1;
    int status = 200;
    std::string response_body;
    std::string error;
};

struct ChatResponse {
    std::string text;
    std::vector<ChatAttempt> attempts;
};

// Backend error that keeps every attempt for the transcript.
class BackendFailure : public Error {
public:
    BackendFailure(ErrorKind kind, const std::string& message, std::vector<ChatAttempt> attempts)
        : Error(kind, std::string(to_string(kind)) + ": " + message), attempts_(std::move(attempts)) {}
    const std::vector<ChatAttempt>& attempts() const { return attempts_; }

private:
    std::vector<ChatAttempt> attempts_;
};

// Implementations must be safe to call from several workers at once.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string id() const = 0;
    virtual ChatResponse complete(const ChatRequest& request) const = 0;
};

// Returns queued responses in FIFO order; an empty queue is BackendUnavailable.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses);
    std::string id() const override { return "scripted"; }
    ChatResponse complete(const ChatRequest& request) const override;
    std::size_t remaining() const;

private:
    mutable std::mutex mu_;
    mutable std::deque<std::string> queue_;
};

// Answers from benchmark ground truth.
class OracleBackend final : public ChatBackend {
public:
    explicit OracleBackend(std::span<const BenchmarkCase> cases);
    std::string id() const override { return "oracle"; }
    ChatResponse complete(const ChatRequest& request) const override;

private:
    struct Truth {
        bool has_error = false;
        std::string span;
        std::string original;
    };
    std::map<std::string, Truth, std::less<>> truth_;
};

// Says NO at detection, names nothing, and echoes the report when asked to correct.
class EchoBackend final : public ChatBackend {
public:
    std::string id() const override { return "echo"; }
    ChatResponse complete(const ChatRequest& request) const override;
};

// Seeded mix of well-formed, malformed, and failing responses, a pure
// function of (seed, case_id, stage, call).
class FuzzBackend final : public ChatBackend {
public:
    explicit FuzzBackend(std::uint64_t seed, double failure_rate = 0.02) : seed_(seed), failure_rate_(failure_rate) {}
    std::string id() const override { return "fuzz"; }
    ChatResponse complete(const ChatRequest& request) const override;

private:
    std::uint64_t seed_;
    double failure_rate_;
};

struct HttpChatConfig {
    std::string url;  // full chat-completions endpoint
    std::string model;
    std::optional<std::string> api_key;
    std::chrono::milliseconds timeout{60000};
    RetryPolicy retry;
    Sleeper sleeper;
};

// OpenAI-compatible chat completion over HTTP.
class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(HttpChatConfig config);
    std::string id() const override { return "http:" + config_.model; }
    ChatResponse complete(const ChatRequest& request) const override;

    static nlohmann::json request_body(const std::string& model, const ChatRequest& request);

private:
    HttpChatConfig config_;
};

}  // namespace proofread
