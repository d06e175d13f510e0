#pragma once

#include "proofread/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace proofread {

struct RetryPolicy {
    int max_attempts = 4;  // including the first
    std::chrono::milliseconds initial_backoff{250};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};

    // Delay before attempt n+1, given n attempts made so far (n >= 1).
    std::chrono::milliseconds delay_after(int attempts_made) const;
};

bool is_retryable_status(int status);

struct HttpAttempt {
    int attempt = 0;
    int status = 0;  // 0 when the transport failed
    std::string response_body;
    std::string error;
};

struct HttpExchange {
    std::string request_body;
    std::vector<HttpAttempt> attempts;
    std::optional<ErrorKind> failure;  // set when no attempt succeeded
    std::string failure_message;

    bool ok() const { return !failure.has_value(); }
    const std::string& body() const { return attempts.back().response_body; }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// POSTs JSON to a single URL with bounded retries and exponential backoff.
// 401/403 end immediately with AuthFailure; 408/425/429/5xx and transport
// errors are retried; exhausting retries yields `unavailable_kind`.
class JsonHttpClient {
public:
    JsonHttpClient(std::string url, std::chrono::milliseconds timeout, RetryPolicy retry,
                   std::optional<std::string> bearer_token, ErrorKind unavailable_kind, Sleeper sleeper = {});

    HttpExchange post(const nlohmann::json& body) const;

    const std::string& url() const { return url_; }

private:
    std::string url_;
    std::string origin_;
    std::string path_;
    std::chrono::milliseconds timeout_;
    RetryPolicy retry_;
    std::optional<std::string> token_;
    ErrorKind unavailable_kind_;
    Sleeper sleeper_;
};

}  // namespace proofread
