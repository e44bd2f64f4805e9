#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mathsmith/gateway.hpp"
#include "mathsmith/io.hpp"
#include "support/test_util.hpp"

using namespace mathsmith;
using mathsmith::testsupport::TempDir;
using mathsmith::testsupport::errc_of;

namespace {

ChatRequest request_for(const std::string& prompt) {
    return ChatRequest::single_user(prompt, "test-model", 0.0, 64);
}

} // namespace

TEST_CASE("mock gateway is a pure lookup") {
    std::map<std::string, std::string> fixtures;
    fixtures[prompt_hash(request_for("p"))] = "ans";
    MockGateway gateway(fixtures);

    ChatResponse first = gateway.chat(request_for("p"));
    ChatResponse second = gateway.chat(request_for("p"));
    CHECK(first.text == "ans");
    CHECK(first.text == second.text);
    CHECK(first.finish_reason == FinishReason::stop);

    CHECK(errc_of([&] { gateway.chat(request_for("unknown")); }) == Errc::malformed_response);
}

TEST_CASE("empty fixture map rejects everything") {
    MockGateway gateway({});
    CHECK(errc_of([&] { gateway.chat(request_for("anything")); }) == Errc::malformed_response);
}

TEST_CASE("request validation") {
    MockGateway gateway({});
    ChatRequest bad;
    bad.model_id = "m";
    CHECK(errc_of([&] { gateway.chat(bad); }) == Errc::invalid_argument);

    bad.messages.push_back({Role::user, "hi"});
    bad.messages.push_back({Role::assistant, "there"});
    CHECK(errc_of([&] { gateway.chat(bad); }) == Errc::invalid_argument);

    ChatRequest negative_temp = request_for("p");
    negative_temp.temperature = -1.0;
    CHECK(errc_of([&] { gateway.chat(negative_temp); }) == Errc::invalid_argument);
}

TEST_CASE("prompt hash covers messages only, cache key covers everything") {
    ChatRequest a = request_for("p");
    ChatRequest b = request_for("p");
    b.temperature = 0.7;
    CHECK(prompt_hash(a) == prompt_hash(b));
    CHECK(request_cache_key(a) != request_cache_key(b));

    ChatRequest c = request_for("p");
    c.model_id = "other-model";
    CHECK(request_cache_key(a) != request_cache_key(c));
    ChatRequest d = request_for("p");
    d.max_tokens = 65;
    CHECK(request_cache_key(a) != request_cache_key(d));
}

TEST_CASE("fixture file round trip") {
    TempDir dir("mockfix");
    std::map<std::string, std::string> fixtures;
    fixtures[prompt_hash(request_for("p"))] = "line one\nline \"two\"";
    std::vector<Json> lines;
    for (const auto& [hash, response] : fixtures)
        lines.push_back({{"hash", hash}, {"response", response}});
    write_jsonl_atomic(dir.path() / "fixtures.jsonl", lines);

    auto gateway = MockGateway::from_file(dir.path() / "fixtures.jsonl");
    CHECK(gateway->chat(request_for("p")).text == "line one\nline \"two\"");
}

TEST_CASE("cache returns byte-identical responses and survives reloads") {
    TempDir dir("cache");
    std::map<std::string, std::string> fixtures;
    fixtures[prompt_hash(request_for("p"))] = "cached \xE2\x88\x92 body\nsecond line";
    auto inner = std::make_shared<MockGateway>(fixtures);
    CachedGateway cached(inner, dir.path() / "cache");

    ChatResponse first = cached.chat(request_for("p"));
    ChatResponse second = cached.chat(request_for("p"));
    CHECK(first.text == second.text);
    CHECK(cached.stats().cache_hits == 1);

    // A fresh instance over the same directory serves the same bytes even
    // when the inner gateway no longer knows the prompt.
    CachedGateway rehydrated(std::make_shared<MockGateway>(std::map<std::string, std::string>{}),
                             dir.path() / "cache");
    CHECK(rehydrated.chat(request_for("p")).text == first.text);
}

TEST_CASE("retry budget zero fails after one attempt") {
    GatewayConfig config;
    config.endpoint = "http://127.0.0.1:1/v1/chat/completions"; // nothing listens here
    config.retry_budget = 0;
    config.backoff_base_ms = 1;
    config.timeout_seconds = 2;
    HttpGateway gateway(config);
    CHECK(errc_of([&] { gateway.chat(request_for("p")); }) == Errc::rate_limited);
    CHECK(gateway.stats().retries == 0);
}

namespace {

struct LiveServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> concurrent{0};
    std::atomic<int> peak{0};
    std::atomic<int> hits{0};

    explicit LiveServer(int fail_first = 0, bool auth_required = false, bool garbage = false) {
        server.Post("/v1/chat/completions", [this, fail_first, auth_required, garbage](
                                                const httplib::Request& req, httplib::Response& res) {
            int now = ++concurrent;
            int seen = peak.load();
            while (now > seen && !peak.compare_exchange_weak(seen, now)) {
            }
            int n = ++hits;
            if (auth_required && req.get_header_value("Authorization") != "Bearer sesame") {
                res.status = 401;
                --concurrent;
                return;
            }
            if (n <= fail_first) {
                res.status = 503;
                --concurrent;
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(25));
            if (garbage) {
                res.set_content("not json at all", "text/plain");
            } else {
                nlohmann::json body = nlohmann::json::parse(req.body);
                std::string content = "echo:" + body["messages"].back()["content"].get<std::string>();
                nlohmann::json reply = {
                    {"choices",
                     {{{"message", {{"role", "assistant"}, {"content", content}}},
                       {"finish_reason", "stop"}}}},
                    {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 2}}}};
                res.set_content(reply.dump(), "application/json");
            }
            --concurrent;
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LiveServer() {
        server.stop();
        thread.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    }
};

} // namespace

TEST_CASE("http gateway round trip with retries") {
    LiveServer server(/*fail_first=*/2);
    GatewayConfig config;
    config.endpoint = server.endpoint();
    config.retry_budget = 3;
    config.backoff_base_ms = 1;
    HttpGateway gateway(config);

    ChatResponse response = gateway.chat(request_for("ping"));
    CHECK(response.text == "echo:ping");
    CHECK(response.finish_reason == FinishReason::stop);
    CHECK(gateway.stats().retries == 2);
}

TEST_CASE("auth failures are not retried") {
    LiveServer server(0, /*auth_required=*/true);
    GatewayConfig config;
    config.endpoint = server.endpoint();
    config.api_key_env = "MATHSMITH_TEST_KEY_UNSET";
    config.retry_budget = 5;
    config.backoff_base_ms = 1;
    HttpGateway gateway(config);
    CHECK(errc_of([&] { gateway.chat(request_for("p")); }) == Errc::auth);
    CHECK(server.hits == 1);
}

TEST_CASE("api key is read from the configured environment variable") {
    LiveServer server(0, /*auth_required=*/true);
    setenv("MATHSMITH_TEST_KEY", "sesame", 1);
    GatewayConfig config;
    config.endpoint = server.endpoint();
    config.api_key_env = "MATHSMITH_TEST_KEY";
    HttpGateway gateway(config);
    CHECK(gateway.chat(request_for("p")).text == "echo:p");
}

TEST_CASE("malformed 200 body raises without retry") {
    LiveServer server(0, false, /*garbage=*/true);
    GatewayConfig config;
    config.endpoint = server.endpoint();
    config.retry_budget = 4;
    config.backoff_base_ms = 1;
    HttpGateway gateway(config);
    CHECK(errc_of([&] { gateway.chat(request_for("p")); }) == Errc::malformed_response);
    CHECK(server.hits == 1);
}

TEST_CASE("in-flight requests never exceed the configured bound") {
    LiveServer server;
    GatewayConfig config;
    config.endpoint = server.endpoint();
    config.max_concurrent_requests = 3;
    config.backoff_base_ms = 1;
    HttpGateway gateway(config);

    std::vector<std::thread> callers;
    std::atomic<int> ok{0};
    for (int i = 0; i < 12; ++i) {
        callers.emplace_back([&gateway, &ok, i] {
            ChatResponse r = gateway.chat(request_for("c" + std::to_string(i)));
            if (r.text == "echo:c" + std::to_string(i)) ++ok;
        });
    }
    for (auto& t : callers) t.join();

    CHECK(ok == 12);
    CHECK(server.peak.load() <= 3);
    CHECK(gateway.stats().peak_in_flight.load() <= 3);
    CHECK(gateway.stats().peak_in_flight.load() >= 1);
}
