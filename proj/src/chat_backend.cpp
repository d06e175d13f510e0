#include "proofread/chat_backend.hpp"

#include "proofread/embedding.hpp"
#include "proofread/rng.hpp"
#include "proofread/text.hpp"

namespace proofread {

namespace {

ChatResponse single(std::string text) {
    ChatResponse r;
    r.attempts.push_back({1, 200, text, {}});
    r.text = std::move(text);
    return r;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses) : queue_(responses.begin(), responses.end()) {}

ChatResponse ScriptedBackend::complete(const ChatRequest&) const {
    std::string next;
    {
        std::lock_guard lock(mu_);
        if (queue_.empty()) throw BackendFailure(ErrorKind::BackendUnavailable, "script exhausted", {});
        next = std::move(queue_.front());
        queue_.pop_front();
    }
    return single(std::move(next));
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mu_);
    return queue_.size();
}

OracleBackend::OracleBackend(std::span<const BenchmarkCase> cases) {
    for (const auto& c : cases) {
        Truth t;
        t.has_error = c.descriptor.has_value();
        if (t.has_error) t.span = text::collapse_whitespace(c.descriptor->corrupted_span);
        t.original = c.original.text();
        truth_.emplace(c.case_id, std::move(t));
    }
}

ChatResponse OracleBackend::complete(const ChatRequest& request) const {
    const auto it = truth_.find(request.case_id);
    if (it == truth_.end()) {
        throw BackendFailure(ErrorKind::BackendUnavailable, "oracle has no case '" + request.case_id + "'", {});
    }
    const auto& t = it->second;
    switch (request.stage) {
        case Stage::Detect: return single(t.has_error ? "ANSWER: YES" : "ANSWER: NO");
        case Stage::Localize: return single("SPAN: " + t.span);
        case Stage::Correct:
        case Stage::EndToEnd: return single("CORRECTED_REPORT:\n" + t.original);
    }
    return single({});
}

ChatResponse EchoBackend::complete(const ChatRequest& request) const {
    switch (request.stage) {
        case Stage::Detect: return single("ANSWER: NO");
        case Stage::Localize: return single("SPAN: ");
        case Stage::Correct:
        case Stage::EndToEnd: return single("CORRECTED_REPORT:\n" + request.report_text);
    }
    return single({});
}

ChatResponse FuzzBackend::complete(const ChatRequest& request) const {
    const auto key = request.case_id + '\x1f' + std::string(to_string(request.stage)) + '\x1f' +
                     std::to_string(request.call);
    Rng rng(fnv1a64(key, seed_));
    if (rng.unit() < failure_rate_) {
        throw BackendFailure(ErrorKind::BackendUnavailable, "injected failure",
                             {{1, 503, "", "service unavailable"}});
    }
    const auto pick = rng.index(6);
    switch (request.stage) {
        case Stage::Detect: {
            static const char* kOut[] = {"ANSWER: YES", "ANSWER: NO", "answer: yes\nreasoning follows",
                                         "Yes, an error is present.", "The report looks fine.", ""};
            return single(kOut[pick]);
        }
        case Stage::Localize: {
            const auto& r = request.report_text;
            const auto start = r.empty() ? 0 : rng.index(r.size());
            const auto piece = text::collapse_whitespace(r.substr(start, 1 + rng.index(24)));
            static const char* kPrefix[] = {"SPAN: ", "SPAN: ", "span:", "The error is ", "", "SPAN:"};
            return single(std::string(kPrefix[pick]) + piece);
        }
        case Stage::Correct:
        case Stage::EndToEnd: {
            std::string body = request.report_text;
            if (!body.empty() && rng.unit() < 0.5) body[rng.index(body.size())] = 'x';
            switch (pick) {
                case 0:
                case 1: return single("CORRECTED_REPORT:\n" + body);
                case 2: return single("Here is the fix.\n\n" + body + "\n\nDone.");
                case 3: return single("CORRECTED_REPORT: " + body);
                case 4: return single("no marker");
                default: return single("");
            }
        }
    }
    return single({});
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {}

nlohmann::json HttpChatBackend::request_body(const std::string& model, const ChatRequest& request) {
    return {{"model", model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
            {"max_tokens", request.params.max_new_tokens},
            {"temperature", request.params.temperature},
            {"top_p", request.params.top_p},
            {"do_sample", request.params.sampling}};
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) const {
    if (!config_.api_key || config_.api_key->empty()) {
        throw BackendFailure(ErrorKind::AuthFailure, "no credentials configured for " + config_.url, {});
    }
    const JsonHttpClient client(config_.url, config_.timeout, config_.retry, config_.api_key,
                                ErrorKind::BackendUnavailable, config_.sleeper);
    const auto exchange = client.post(request_body(config_.model, request));

    std::vector<ChatAttempt> attempts;
    for (const auto& a : exchange.attempts) attempts.push_back({a.attempt, a.status, a.response_body, a.error});
    if (!exchange.ok()) throw BackendFailure(*exchange.failure, exchange.failure_message, attempts);

    ChatResponse out;
    out.attempts = attempts;
    try {
        const auto j = nlohmann::json::parse(exchange.body());
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendFailure(ErrorKind::BackendUnavailable, std::string("malformed chat response: ") + e.what(),
                             attempts);
    }
    return out;
}

}  // namespace proofread
