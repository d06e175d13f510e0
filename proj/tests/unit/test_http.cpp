#include "proofread/chat_backend.hpp"
#include "proofread/embedding.hpp"
#include "proofread/http.hpp"

#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <thread>

using namespace proofread;

namespace {

// Local server answering POST /v1/chat with a scripted status sequence.
class FakeServer {
public:
    explicit FakeServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
        server_.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu_);
            bodies_.push_back(req.body);
            auth_.push_back(req.get_header_value("Authorization"));
            const int status = hits_ < statuses_.size() ? statuses_[hits_] : 200;
            ++hits_;
            res.status = status;
            if (status == 200) {
                res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"ANSWER: YES"}}]})",
                                "application/json");
            } else {
                res.set_content(R"({"error":"nope"})", "application/json");
            }
        });
        server_.Post("/v1/embed", [](const httplib::Request& req, httplib::Response& res) {
            const auto j = nlohmann::json::parse(req.body);
            nlohmann::json out{{"vectors", nlohmann::json::array()}};
            for (std::size_t i = 0; i < j["texts"].size(); ++i) out["vectors"].push_back({3.0, 4.0});
            res.set_content(out.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& path = "/v1/chat") const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }
    std::size_t hits() {
        std::lock_guard lock(mu_);
        return hits_;
    }
    std::vector<std::string> bodies() {
        std::lock_guard lock(mu_);
        return bodies_;
    }
    std::vector<std::string> auth() {
        std::lock_guard lock(mu_);
        return auth_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mu_;
    std::vector<int> statuses_;
    std::size_t hits_ = 0;
    std::vector<std::string> bodies_;
    std::vector<std::string> auth_;
};

HttpChatConfig config_for(const FakeServer& s, std::vector<std::chrono::milliseconds>* sleeps) {
    HttpChatConfig c;
    c.url = s.url();
    c.model = "test-model";
    c.api_key = "sk-test-123";
    c.timeout = std::chrono::milliseconds(5000);
    c.retry.max_attempts = 3;
    c.sleeper = [sleeps](std::chrono::milliseconds d) { sleeps->push_back(d); };
    return c;
}

ChatRequest request() {
    ChatRequest r;
    r.case_id = "case-1";
    r.prompt = "### ROLE\nx";
    return r;
}

}  // namespace

TEST(Http, RetryPolicyBackoff) {
    RetryPolicy p;
    EXPECT_EQ(p.delay_after(1).count(), 250);
    EXPECT_EQ(p.delay_after(2).count(), 500);
    EXPECT_EQ(p.delay_after(10).count(), 8000);
    EXPECT_TRUE(is_retryable_status(429));
    EXPECT_TRUE(is_retryable_status(503));
    EXPECT_FALSE(is_retryable_status(400));
    EXPECT_FALSE(is_retryable_status(401));
}

TEST(Http, RateLimitThenSuccess) {
    FakeServer server({429, 200});
    std::vector<std::chrono::milliseconds> sleeps;
    const HttpChatBackend backend(config_for(server, &sleeps));
    const auto res = backend.complete(request());
    EXPECT_EQ(res.text, "ANSWER: YES");
    ASSERT_EQ(res.attempts.size(), 2u);
    EXPECT_EQ(res.attempts[0].status, 429);
    EXPECT_EQ(res.attempts[1].status, 200);
    EXPECT_EQ(server.hits(), 2u);
    ASSERT_EQ(sleeps.size(), 1u);
    EXPECT_EQ(sleeps[0].count(), 250);
}

TEST(Http, RequestBodyCarriesGenerationParams) {
    FakeServer server({200});
    std::vector<std::chrono::milliseconds> sleeps;
    const HttpChatBackend backend(config_for(server, &sleeps));
    backend.complete(request());
    const auto body = nlohmann::json::parse(server.bodies().at(0));
    EXPECT_EQ(body["model"], "test-model");
    EXPECT_EQ(body["messages"][0]["role"], "user");
    EXPECT_EQ(body["messages"][0]["content"], "### ROLE\nx");
    EXPECT_EQ(body["max_tokens"], 300);
    EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.001);
    EXPECT_DOUBLE_EQ(body["top_p"].get<double>(), 0.8);
    EXPECT_EQ(body["do_sample"], true);
    EXPECT_EQ(server.auth().at(0), "Bearer sk-test-123");
}

TEST(Http, UnauthorizedIsNotRetried) {
    FakeServer server({401, 200});
    std::vector<std::chrono::milliseconds> sleeps;
    const HttpChatBackend backend(config_for(server, &sleeps));
    try {
        backend.complete(request());
        FAIL();
    } catch (const BackendFailure& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AuthFailure);
        EXPECT_EQ(e.attempts().size(), 1u);
    }
    EXPECT_EQ(server.hits(), 1u);
}

TEST(Http, MissingKeyFailsBeforeSending) {
    FakeServer server({200});
    std::vector<std::chrono::milliseconds> sleeps;
    auto cfg = config_for(server, &sleeps);
    cfg.api_key.reset();
    const HttpChatBackend backend(cfg);
    try {
        backend.complete(request());
        FAIL();
    } catch (const BackendFailure& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AuthFailure);
    }
    EXPECT_EQ(server.hits(), 0u);
}

TEST(Http, ExhaustedRetriesAreUnavailable) {
    FakeServer server({503, 503, 503, 200});
    std::vector<std::chrono::milliseconds> sleeps;
    const HttpChatBackend backend(config_for(server, &sleeps));
    try {
        backend.complete(request());
        FAIL();
    } catch (const BackendFailure& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BackendUnavailable);
        EXPECT_EQ(e.attempts().size(), 3u);
    }
    EXPECT_EQ(sleeps.size(), 2u);
}

TEST(Http, EmbeddingProviderNormalizes) {
    FakeServer server({});
    HttpEmbedderConfig cfg;
    cfg.url = server.url("/v1/embed");
    cfg.dim = 2;
    const HttpEmbeddingProvider p(cfg, [](std::chrono::milliseconds) {});
    const auto v = embed("pleural effusion", p);
    ASSERT_EQ(v.dim(), 2u);
    EXPECT_NEAR(v.values()[0], 0.6, 1e-6);
    EXPECT_NEAR(v.values()[1], 0.8, 1e-6);
}

TEST(Http, UnreachableEndpointIsProviderUnavailable) {
    HttpEmbedderConfig cfg;
    cfg.url = "http://127.0.0.1:1/v1/embed";
    cfg.dim = 2;
    cfg.timeout = std::chrono::milliseconds(500);
    cfg.retry.max_attempts = 2;
    const HttpEmbeddingProvider p(cfg, [](std::chrono::milliseconds) {});
    try {
        embed("x", p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderUnavailable);
    }
}
