#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace mathsmith {

enum class Role { system, user, assistant };
const char* role_name(Role role);

struct ChatMessage {
    Role role = Role::user;
    std::string text;
};

struct ChatRequest {
    std::vector<ChatMessage> messages; // non-empty, last role must be user
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 1024;

    static ChatRequest single_user(std::string prompt, std::string model_id,
                                   double temperature, int max_tokens);
};

enum class FinishReason { stop, length, error };

struct Usage {
    int64_t prompt_tokens = 0;
    int64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    Usage usage;
};

struct GatewayConfig {
    std::string endpoint;                       // chat-completion URL, e.g. http://host:port/v1/chat/completions
    std::string api_key_env = "MATHSMITH_API_KEY"; // name of the env var holding the key
    int max_concurrent_requests = 4;
    int retry_budget = 2;                       // retries after the first attempt
    std::optional<std::filesystem::path> cache_dir;
    int backoff_base_ms = 250;                  // exponential backoff base
    int timeout_seconds = 120;
};

// Hash of the message list only (roles + texts). Used to key mock fixtures
// and recorded as QAPair provenance.
std::string prompt_hash(const ChatRequest& request);

// Cache key covers every field that affects the completion: model, full
// message list, temperature, max_tokens.
std::string request_cache_key(const ChatRequest& request);

struct GatewayStats {
    std::atomic<int64_t> requests{0};
    std::atomic<int64_t> cache_hits{0};
    std::atomic<int64_t> retries{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> peak_in_flight{0};
};

class Gateway {
  public:
    virtual ~Gateway() = default;

    // Returns the completion or throws Error with one of: auth,
    // rate_limited, malformed_response, invalid_argument.
    virtual ChatResponse chat(const ChatRequest& request) = 0;

    const GatewayStats& stats() const { return stats_; }

  protected:
    void validate(const ChatRequest& request) const;
    GatewayStats stats_;
};

// Deterministic offline gateway: a pure lookup table from prompt_hash to
// response text. Unknown prompts raise malformed_response.
class MockGateway : public Gateway {
  public:
    explicit MockGateway(std::map<std::string, std::string> fixtures);

    // Fixture file: one JSON object per line, fields {"hash", "response"}.
    static std::unique_ptr<MockGateway> from_file(const std::filesystem::path& path);

    ChatResponse chat(const ChatRequest& request) override;

  private:
    std::map<std::string, std::string> fixtures_;
};

// Live JSON chat-completion client (role/content message objects, bearer
// auth). Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff up to the retry budget; in-flight requests are bounded
// by max_concurrent_requests.
class HttpGateway : public Gateway {
  public:
    explicit HttpGateway(GatewayConfig config);
    ~HttpGateway() override;

    ChatResponse chat(const ChatRequest& request) override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Write-through cache around any gateway. Responses are stored as files
// named by request_cache_key under cache_dir; only finish_reason == stop is
// cached. Cache writes are serialized; reads are lock-free after load.
class CachedGateway : public Gateway {
  public:
    CachedGateway(std::shared_ptr<Gateway> inner, std::filesystem::path cache_dir);

    ChatResponse chat(const ChatRequest& request) override;

  private:
    std::shared_ptr<Gateway> inner_;
    std::filesystem::path cache_dir_;
    std::mutex write_mutex_;
};

// Builds the gateway described by a config: mock (fixtures) or http, with an
// optional cache layer on top.
std::shared_ptr<Gateway> make_gateway(const GatewayConfig& config,
                                      const std::optional<std::filesystem::path>& mock_fixtures);

} // namespace mathsmith
