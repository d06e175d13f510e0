#include "proofread/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <thread>

namespace proofread {

std::chrono::milliseconds RetryPolicy::delay_after(int attempts_made) const {
    const double scale = std::pow(multiplier, std::max(0, attempts_made - 1));
    const double ms = static_cast<double>(initial_backoff.count()) * scale;
    return std::chrono::milliseconds(
        static_cast<long long>(std::min(ms, static_cast<double>(max_backoff.count()))));
}

bool is_retryable_status(int status) {
    return status == 0 || status == 408 || status == 425 || status == 429 || (status >= 500 && status <= 599);
}

JsonHttpClient::JsonHttpClient(std::string url, std::chrono::milliseconds timeout, RetryPolicy retry,
                               std::optional<std::string> bearer_token, ErrorKind unavailable_kind, Sleeper sleeper)
    : url_(std::move(url)),
      timeout_(timeout),
      retry_(retry),
      token_(std::move(bearer_token)),
      unavailable_kind_(unavailable_kind),
      sleeper_(std::move(sleeper)) {
    const auto scheme = url_.find("://");
    if (scheme == std::string::npos) fail(ErrorKind::InvalidConfig, "endpoint URL lacks a scheme: " + url_);
    const auto slash = url_.find('/', scheme + 3);
    origin_ = slash == std::string::npos ? url_ : url_.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url_.substr(slash);
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpExchange JsonHttpClient::post(const nlohmann::json& body) const {
    HttpExchange ex;
    ex.request_body = body.dump();

    httplib::Client client(origin_);
    const auto secs = timeout_.count() / 1000;
    const auto usecs = (timeout_.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (token_) headers.emplace("Authorization", "Bearer " + *token_);

    const int attempts = std::max(1, retry_.max_attempts);
    for (int n = 1; n <= attempts; ++n) {
        HttpAttempt a;
        a.attempt = n;
        auto res = client.Post(path_, headers, ex.request_body, "application/json");
        if (res) {
            a.status = res->status;
            a.response_body = res->body;
        } else {
            a.error = httplib::to_string(res.error());
        }
        ex.attempts.push_back(a);

        if (a.status >= 200 && a.status < 300) return ex;
        if (a.status == 401 || a.status == 403) {
            ex.failure = ErrorKind::AuthFailure;
            ex.failure_message = "endpoint " + url_ + " rejected credentials (HTTP " + std::to_string(a.status) + ")";
            return ex;
        }
        if (!is_retryable_status(a.status)) break;
        if (n < attempts) sleeper_(retry_.delay_after(n));
    }
    const auto& last = ex.attempts.back();
    ex.failure = unavailable_kind_;
    ex.failure_message = url_ + " failed after " + std::to_string(ex.attempts.size()) + " attempt(s): " +
                         (last.status ? "HTTP " + std::to_string(last.status) : last.error);
    return ex;
}

}  // namespace proofread
