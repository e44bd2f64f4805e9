#include "mathsmith/gateway.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mathsmith/errors.hpp"
#include "mathsmith/io.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

namespace fs = std::filesystem;

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

ChatRequest ChatRequest::single_user(std::string prompt, std::string model_id,
                                     double temperature, int max_tokens) {
    ChatRequest request;
    request.messages.push_back({Role::user, std::move(prompt)});
    request.model_id = std::move(model_id);
    request.temperature = temperature;
    request.max_tokens = max_tokens;
    return request;
}

std::string prompt_hash(const ChatRequest& request) {
    uint64_t h = fnv1a64("");
    for (const ChatMessage& m : request.messages) {
        h = fnv1a64(role_name(m.role), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(m.text, h);
        h = fnv1a64("\x1e", h);
    }
    return to_hex16(h);
}

static std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, end);
}

std::string request_cache_key(const ChatRequest& request) {
    uint64_t h = fnv1a64(request.model_id);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(format_double(request.temperature), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(std::to_string(request.max_tokens), h);
    h = fnv1a64("\x1e", h);
    for (const ChatMessage& m : request.messages) {
        h = fnv1a64(role_name(m.role), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(m.text, h);
        h = fnv1a64("\x1e", h);
    }
    return to_hex16(h);
}

void Gateway::validate(const ChatRequest& request) const {
    if (request.messages.empty()) raise(Errc::invalid_argument, "chat request has no messages");
    if (request.messages.back().role != Role::user)
        raise(Errc::invalid_argument, "last chat message must have role user");
    if (request.temperature < 0)
        raise(Errc::invalid_argument, "temperature must be >= 0");
    if (request.max_tokens <= 0)
        raise(Errc::invalid_argument, "max_tokens must be positive");
}

static int64_t approx_tokens(const std::string& text) {
    int64_t words = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

// ---------------------------------------------------------------------------
// MockGateway

MockGateway::MockGateway(std::map<std::string, std::string> fixtures)
    : fixtures_(std::move(fixtures)) {}

std::unique_ptr<MockGateway> MockGateway::from_file(const fs::path& path) {
    std::map<std::string, std::string> fixtures;
    for_each_jsonl(path, [&](size_t lineno, const Json& record) {
        if (!record.contains("hash") || !record.contains("response"))
            raise(Errc::malformed_record,
                  path.string() + ":" + std::to_string(lineno) + ": need {hash, response}");
        fixtures[record["hash"].get<std::string>()] = record["response"].get<std::string>();
    });
    return std::make_unique<MockGateway>(std::move(fixtures));
}

ChatResponse MockGateway::chat(const ChatRequest& request) {
    validate(request);
    stats_.requests++;
    auto it = fixtures_.find(prompt_hash(request));
    if (it == fixtures_.end())
        raise(Errc::malformed_response,
              "mock gateway has no fixture for prompt " + prompt_hash(request));
    ChatResponse response;
    response.text = it->second;
    response.finish_reason = FinishReason::stop;
    int64_t prompt_tokens = 0;
    for (const ChatMessage& m : request.messages) prompt_tokens += approx_tokens(m.text);
    response.usage = {prompt_tokens, approx_tokens(response.text)};
    return response;
}

// ---------------------------------------------------------------------------
// HttpGateway

namespace {

struct ParsedEndpoint {
    std::string host_port; // scheme://host[:port]
    std::string path;      // /v1/chat/completions
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    size_t scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        raise(Errc::invalid_argument, "endpoint must include a scheme: " + endpoint);
    size_t path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/v1/chat/completions"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

class Semaphore {
  public:
    explicit Semaphore(int count) : count_(count) {}
    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        std::lock_guard lock(mutex_);
        ++count_;
        cv_.notify_one();
    }

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int count_;
};

} // namespace

struct HttpGateway::Impl {
    GatewayConfig config;
    ParsedEndpoint endpoint;
    std::string api_key;
    Semaphore slots;

    explicit Impl(GatewayConfig cfg)
        : config(std::move(cfg)),
          endpoint(parse_endpoint(config.endpoint)),
          slots(std::max(1, config.max_concurrent_requests)) {
        if (config.max_concurrent_requests < 1)
            raise(Errc::invalid_argument, "max_concurrent_requests must be >= 1");
        if (!config.api_key_env.empty()) {
            if (const char* value = std::getenv(config.api_key_env.c_str())) api_key = value;
        }
    }
};

HttpGateway::HttpGateway(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpGateway::~HttpGateway() = default;

static ChatResponse parse_completion_body(const std::string& body) {
    nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
        raise(Errc::malformed_response, "endpoint returned non-JSON body");
    try {
        const auto& choices = parsed.at("choices");
        if (!choices.is_array() || choices.empty())
            raise(Errc::malformed_response, "response has no choices");
        const auto& choice = choices.at(0);
        ChatResponse response;
        response.text = choice.at("message").at("content").get<std::string>();
        std::string finish = choice.value("finish_reason", "stop");
        response.finish_reason = finish == "length" ? FinishReason::length : FinishReason::stop;
        if (parsed.contains("usage")) {
            const auto& usage = parsed["usage"];
            response.usage.prompt_tokens = usage.value("prompt_tokens", int64_t{0});
            response.usage.completion_tokens = usage.value("completion_tokens", int64_t{0});
        }
        return response;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::malformed_response, std::string("unexpected response shape: ") + e.what());
    }
}

ChatResponse HttpGateway::chat(const ChatRequest& request) {
    validate(request);
    stats_.requests++;

    nlohmann::json body;
    body["model"] = request.model_id;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    body["messages"] = nlohmann::json::array();
    for (const ChatMessage& m : request.messages)
        body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.text}});
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

    std::string last_failure = "endpoint unreachable";
    const int attempts = 1 + std::max(0, impl_->config.retry_budget);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            stats_.retries++;
            auto delay = std::chrono::milliseconds(
                static_cast<int64_t>(impl_->config.backoff_base_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }

        impl_->slots.acquire();
        int current = ++stats_.in_flight;
        int peak = stats_.peak_in_flight.load();
        while (current > peak && !stats_.peak_in_flight.compare_exchange_weak(peak, current)) {
        }

        httplib::Client client(impl_->endpoint.host_port);
        client.set_connection_timeout(impl_->config.timeout_seconds, 0);
        client.set_read_timeout(impl_->config.timeout_seconds, 0);
        auto result = client.Post(impl_->endpoint.path, headers, payload, "application/json");

        --stats_.in_flight;
        impl_->slots.release();

        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        int status = result->status;
        if (status == 401 || status == 403)
            raise(Errc::auth, "endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
        if (status == 429 || status >= 500) {
            last_failure = "HTTP " + std::to_string(status);
            continue;
        }
        if (status != 200)
            raise(Errc::malformed_response, "endpoint returned HTTP " + std::to_string(status));
        return parse_completion_body(result->body);
    }
    raise(Errc::rate_limited, "retry budget exhausted after " + std::to_string(attempts) +
                                  " attempt(s); last failure: " + last_failure);
}

// ---------------------------------------------------------------------------
// CachedGateway

static std::string serialize_response(const ChatResponse& response) {
    Json body;
    body["text"] = response.text;
    body["finish_reason"] = response.finish_reason == FinishReason::length ? "length" : "stop";
    body["usage"] = {{"prompt_tokens", response.usage.prompt_tokens},
                     {"completion_tokens", response.usage.completion_tokens}};
    return body.dump();
}

static std::optional<ChatResponse> deserialize_response(const std::string& body) {
    Json parsed = Json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text")) return std::nullopt;
    ChatResponse response;
    response.text = parsed["text"].get<std::string>();
    response.finish_reason =
        parsed.value("finish_reason", "stop") == "length" ? FinishReason::length : FinishReason::stop;
    if (parsed.contains("usage")) {
        response.usage.prompt_tokens = parsed["usage"].value("prompt_tokens", int64_t{0});
        response.usage.completion_tokens = parsed["usage"].value("completion_tokens", int64_t{0});
    }
    return response;
}

CachedGateway::CachedGateway(std::shared_ptr<Gateway> inner, fs::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    fs::create_directories(cache_dir_);
}

ChatResponse CachedGateway::chat(const ChatRequest& request) {
    const fs::path entry = cache_dir_ / request_cache_key(request);
    {
        std::error_code ec;
        if (fs::exists(entry, ec)) {
            if (auto cached = deserialize_response(read_text_file(entry))) {
                stats_.cache_hits++;
                return *cached;
            }
        }
    }
    ChatResponse response = inner_->chat(request);
    if (response.finish_reason == FinishReason::stop) {
        std::lock_guard lock(write_mutex_);
        write_text_file_atomic(entry, serialize_response(response));
    }
    return response;
}

std::shared_ptr<Gateway> make_gateway(const GatewayConfig& config,
                                      const std::optional<fs::path>& mock_fixtures) {
    std::shared_ptr<Gateway> gateway;
    if (mock_fixtures) {
        gateway = MockGateway::from_file(*mock_fixtures);
    } else {
        gateway = std::make_shared<HttpGateway>(config);
    }
    if (config.cache_dir) gateway = std::make_shared<CachedGateway>(gateway, *config.cache_dir);
    return gateway;
}

} // namespace mathsmith
