#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "incharacter/chat.hpp"
#include "incharacter/io.hpp"

using namespace incharacter;
using nlohmann::json;

namespace {

/// In-process chat-completions endpoint for wire-contract tests.
class FakeServer {
public:
    explicit FakeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler)
        : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         handler_(req, res);
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this]() { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }

private:
    httplib::Server server_;
    std::function<void(const httplib::Request&, httplib::Response&)> handler_;
    int port_ = 0;
    std::thread thread_;
};

std::string completion_body(const std::string& content) {
    json body;
    body["choices"] = json::array();
    body["choices"].push_back({{"message", {{"role", "assistant"}, {"content", content}}}});
    return body.dump();
}

BackendDescriptor http_descriptor(const std::string& endpoint) {
    BackendDescriptor d;
    d.id = "test-http";
    d.kind = "http";
    d.endpoint = endpoint;
    d.model = "test-model";
    return d;
}

ChatRequest simple_request(const std::string& content, double temperature = 0.0) {
    ChatRequest request;
    request.messages = {{"system", "sys"}, {"user", content}};
    request.temperature = temperature;
    request.max_tokens = 128;
    return request;
}

/// Fixed-reply backend for cache and wrapper tests.
class FixedBackend : public ChatBackend {
public:
    explicit FixedBackend(std::string reply) : reply_(std::move(reply)) {}
    std::string id() const override { return "fixed"; }
    std::string complete(const ChatRequest&) override {
        ++calls;
        return reply_;
    }
    std::atomic<int> calls{0};

private:
    std::string reply_;
};

}  // namespace

TEST_CASE("request body follows the chat-completions wire shape") {
    const json body = HttpChatBackend::request_body("m1", simple_request("hello", 0.7));
    CHECK(body.at("model") == "m1");
    CHECK(body.at("temperature") == doctest::Approx(0.7));
    CHECK(body.at("max_tokens") == 128);
    REQUIRE(body.at("messages").size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == "hello");
}

TEST_CASE("http backend") {
    SUBCASE("success path returns the assistant content") {
        FakeServer server([](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            CHECK(body.at("model") == "test-model");
            res.set_content(completion_body("pong"), "application/json");
        });
        HttpChatBackend backend(http_descriptor(server.endpoint()), {3, 1});
        CHECK(backend.complete(simple_request("ping")) == "pong");
    }

    SUBCASE("credentials come from the named environment variable") {
        setenv("INCHARACTER_TEST_TOKEN", "sekrit", 1);
        std::string seen_auth;
        FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
            seen_auth = req.get_header_value("Authorization");
            res.set_content(completion_body("ok"), "application/json");
        });
        auto descriptor = http_descriptor(server.endpoint());
        descriptor.credential_env = "INCHARACTER_TEST_TOKEN";
        HttpChatBackend backend(descriptor, {3, 1});
        backend.complete(simple_request("x"));
        CHECK(seen_auth == "Bearer sekrit");

        descriptor.credential_env = "INCHARACTER_MISSING_TOKEN";
        unsetenv("INCHARACTER_MISSING_TOKEN");
        HttpChatBackend missing(descriptor, {3, 1});
        CHECK_THROWS_AS(missing.complete(simple_request("x")), ChatError);
    }

    SUBCASE("a 500 is retried and then succeeds") {
        std::atomic<int> hits{0};
        FakeServer server([&](const httplib::Request&, httplib::Response& res) {
            if (++hits == 1) {
                res.status = 500;
                res.set_content("boom", "text/plain");
            } else {
                res.set_content(completion_body("recovered"), "application/json");
            }
        });
        HttpChatBackend backend(http_descriptor(server.endpoint()), {3, 1});
        CHECK(backend.complete(simple_request("x")) == "recovered");
        CHECK(hits == 2);
    }

    SUBCASE("a 404 fails fast without retries") {
        std::atomic<int> hits{0};
        FakeServer server([&](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 404;
        });
        HttpChatBackend backend(http_descriptor(server.endpoint()), {3, 1});
        CHECK_THROWS_AS(backend.complete(simple_request("x")), ChatError);
        CHECK(hits == 1);
    }

    SUBCASE("persistent failures exhaust the retry budget") {
        std::atomic<int> hits{0};
        FakeServer server([&](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 503;
        });
        HttpChatBackend backend(http_descriptor(server.endpoint()), {3, 1});
        CHECK_THROWS_AS(backend.complete(simple_request("x")), ChatError);
        CHECK(hits == 3);
    }

    SUBCASE("descriptor validation") {
        BackendDescriptor bad;
        bad.id = "b";
        bad.kind = "http";
        bad.endpoint = "ftp://nope";
        bad.model = "m";
        CHECK_THROWS_AS(bad.validate(), ChatError);
        bad.endpoint = "http://ok";
        bad.temperature = -1;
        CHECK_THROWS_AS(bad.validate(), ChatError);
    }
}

TEST_CASE("response cache") {
    const auto dir = std::filesystem::temp_directory_path() / "incharacter_cache_test";
    std::filesystem::remove_all(dir);
    ResponseCache cache(dir);

    const auto request = simple_request("question");
    CHECK(!cache.lookup("m", request).has_value());
    cache.store("m", request, "answer");
    CHECK(*cache.lookup("m", request) == "answer");

    SUBCASE("temperature, salt, model and payload all enter the key") {
        auto warmer = request;
        warmer.temperature = 0.2;
        CHECK(ResponseCache::key("m", warmer) != ResponseCache::key("m", request));
        auto salted = request;
        salted.salt = "run:2";
        CHECK(ResponseCache::key("m", salted) != ResponseCache::key("m", request));
        CHECK(ResponseCache::key("other", request) != ResponseCache::key("m", request));
        auto longer = request;
        longer.max_tokens = 999;
        CHECK(ResponseCache::key("m", longer) != ResponseCache::key("m", request));
        auto reworded = request;
        reworded.messages[1].content = "question!";
        CHECK(ResponseCache::key("m", reworded) != ResponseCache::key("m", request));
    }

    SUBCASE("caching backend short-circuits repeats") {
        auto inner = std::make_shared<FixedBackend>("fixed-reply");
        CachingBackend caching(inner, std::make_shared<ResponseCache>(dir / "wrap"));
        CHECK(caching.complete(request) == "fixed-reply");
        CHECK(caching.complete(request) == "fixed-reply");
        CHECK(caching.complete(request) == "fixed-reply");
        CHECK(inner->calls == 1);
        CHECK(caching.hits() == 2);
        CHECK(caching.misses() == 1);
    }
}

TEST_CASE("recording backend captures forwarded requests") {
    auto inner = std::make_shared<FixedBackend>("r");
    RecordingBackend recording(inner);
    recording.complete(simple_request("one"));
    recording.complete(simple_request("two"));
    REQUIRE(recording.call_count() == 2);
    CHECK(recording.requests()[0].messages[1].content == "one");
    CHECK(recording.requests()[1].messages[1].content == "two");
}

TEST_CASE("parallel_for") {
    SUBCASE("covers every index exactly once") {
        std::vector<std::atomic<int>> hits(100);
        parallel_for(100, 8, [&](std::size_t i) { ++hits[i]; });
        for (const auto& h : hits) {
            CHECK(h == 1);
        }
    }
    SUBCASE("respects the parallelism bound") {
        std::atomic<int> active{0}, peak{0};
        parallel_for(64, 3, [&](std::size_t) {
            const int now = ++active;
            int snapshot = peak.load();
            while (now > snapshot && !peak.compare_exchange_weak(snapshot, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
            --active;
        });
        CHECK(peak <= 3);
    }
    SUBCASE("rethrows the first failure after joining") {
        CHECK_THROWS_AS(parallel_for(16, 4,
                                     [&](std::size_t i) {
                                         if (i == 7) {
                                             throw ChatError("boom");
                                         }
                                     }),
                        ChatError);
    }
}

TEST_CASE("rate limiter spaces acquisitions") {
    RateLimiter limiter(200.0);  // 5ms interval
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 4; ++i) {
        limiter.acquire();
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    CHECK(elapsed >= 10);  // at least 3 waits of ~5ms, allowing scheduler slop

    RateLimiter unlimited(0.0);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
        unlimited.acquire();
    }
    CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                t0)
              .count() < 100);
}
