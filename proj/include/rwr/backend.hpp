#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace rwr {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct Message {
    Role role = Role::User;
    std::string content;
};

/// A role-tagged message list plus sampling parameters.
struct ChatExchange {
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_new = 512;
    std::string model_name;

    static ChatExchange user(std::string content);

    /// Throws InvalidArgument unless messages is non-empty, ends with a User
    /// turn, temperature is in [0, 2] and max_new is positive.
    void validate() const;

    const std::string& last_user_message() const { return messages.back().content; }
};

struct Completion {
    std::string text;
    double latency_ms = 0.0;
    int attempts = 1;
};

/// Chat-completion interface. Implementations must be callable concurrently.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual Completion complete(const ChatExchange& exchange) const = 0;
};

struct MockRule {
    std::string match_contains;
    std::string response;
};

/// Deterministic scripted backend: the first rule whose `match_contains` is a
/// substring of the last user message answers, with latency 0.
class MockBackend final : public ChatBackend {
public:
    /// Throws InvalidArgument if the rule list is empty or the last rule is
    /// not the catch-all (empty match).
    explicit MockBackend(std::vector<MockRule> rules);

    /// Reads a JSONL rule file of {"match_contains", "response"} objects.
    static MockBackend load(const std::filesystem::path& path);

    Completion complete(const ChatExchange& exchange) const override;

    const std::vector<MockRule>& rules() const { return rules_; }

private:
    std::vector<MockRule> rules_;
};

/// Backend driven by an in-process function; used for fixtures whose replies
/// depend on prompt structure rather than fixed substrings.
class ScriptedBackend final : public ChatBackend {
public:
    using Responder = std::function<std::string(const ChatExchange&)>;

    explicit ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

    Completion complete(const ChatExchange& exchange) const override;

private:
    Responder responder_;
};

/// Result slot of a batch call; holds either a completion or the error that
/// item raised.
struct BatchItem {
    std::optional<Completion> completion;
    std::exception_ptr error;

    bool ok() const { return completion.has_value(); }

    /// The completion, or rethrows the stored error.
    const Completion& value() const;

    std::string error_kind() const;
    std::string error_message() const;
};

/// Runs fn(0..count-1) on at most `parallelism` worker threads. Exceptions
/// escaping fn terminate; callers capture them per item.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t parallelism, Fn&& fn) {
    if (count == 0) return;
    const std::size_t workers = std::min(std::max<std::size_t>(parallelism, 1), count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
}

/// Issues every exchange with at most `parallelism` in flight. Output order
/// equals input order; per-item failures are captured, never thrown.
std::vector<BatchItem> complete_batch(const ChatBackend& backend,
                                      std::span<const ChatExchange> exchanges,
                                      std::size_t parallelism);

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_s = 0.5;
    double factor = 2.0;
    double jitter = 0.25;

    /// Delay before retry number `retry` (1 = first retry) without jitter.
    double nominal_delay_s(int retry) const;

    /// Nominal delay scaled by 1 + jitter*(2u - 1) for u in [0, 1).
    double jittered_delay_s(int retry, double u) const;
};

struct HttpBackendConfig {
    /// scheme://host[:port][/path]; a path here overrides `path`.
    std::string url;
    std::string path = "/v1/chat/completions";
    std::string api_key;
    std::string model;
    double timeout_s = 60.0;
    RetryPolicy retry;
};

/// Client for the chat-completions JSON protocol. Retries timeouts, transport
/// failures, HTTP 408/429 and 5xx with exponential backoff.
class HttpBackend final : public ChatBackend {
public:
    using Sleeper = std::function<void(double seconds)>;

    explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});

    Completion complete(const ChatExchange& exchange) const override;

    const HttpBackendConfig& config() const { return config_; }

private:
    HttpBackendConfig config_;
    std::string base_;
    std::string path_;
    Sleeper sleeper_;
};

/// Extracts choices[0].message.content from a response body. Throws
/// ProtocolError on anything else.
std::string parse_chat_response(const std::string& body);

/// Request JSON: {model, messages:[{role, content}], temperature, max_tokens}.
std::string render_chat_request(const ChatExchange& exchange, const std::string& default_model);

}  // namespace rwr
