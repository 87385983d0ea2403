#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rwr/backend.hpp"
#include "rwr/error.hpp"
#include "rwr/log.hpp"

namespace rwr {

namespace {

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

double jitter_draw() {
    thread_local std::mt19937_64 gen{std::random_device{}()};
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

void sleep_seconds(double seconds) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw InvalidArgument("endpoint url must start with http:// or https://: " + url);
    }
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, ""};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

double RetryPolicy::nominal_delay_s(int retry) const {
    return base_delay_s * std::pow(factor, std::max(retry, 1) - 1);
}

double RetryPolicy::jittered_delay_s(int retry, double u) const {
    return nominal_delay_s(retry) * (1.0 + jitter * (2.0 * u - 1.0));
}

std::string render_chat_request(const ChatExchange& exchange, const std::string& default_model) {
    nlohmann::ordered_json body;
    body["model"] = exchange.model_name.empty() ? default_model : exchange.model_name;
    body["messages"] = nlohmann::ordered_json::array();
    for (const auto& m : exchange.messages) {
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    body["temperature"] = exchange.temperature;
    body["max_tokens"] = exchange.max_new;
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string parse_chat_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& err) {
        throw ProtocolError(std::string("response body is not JSON: ") + err.what());
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw ProtocolError("response has no choices");
    }
    const auto& choice = j["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
        throw ProtocolError("first choice has no message");
    }
    const auto& content = choice["message"].value("content", nlohmann::json());
    if (!content.is_string()) throw ProtocolError("first choice message has no string content");
    return content.get<std::string>();
}

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
    if (config_.retry.max_attempts < 1) throw InvalidArgument("max_attempts must be at least 1");
    auto [base, path] = split_url(config_.url);
    base_ = std::move(base);
    path_ = path.empty() ? config_.path : std::move(path);
    if (!sleeper_) sleeper_ = sleep_seconds;
}

Completion HttpBackend::complete(const ChatExchange& exchange) const {
    exchange.validate();
    const std::string body = render_chat_request(exchange, config_.model);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config_.timeout_s));
    const auto started = std::chrono::steady_clock::now();
    std::string last_failure;

    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        if (attempt > 1) sleeper_(config_.retry.jittered_delay_s(attempt - 1, jitter_draw()));

        httplib::Client client(base_);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        auto res = client.Post(path_, headers, body, "application/json");

        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            const double elapsed = std::chrono::duration<double, std::milli>(
                                       std::chrono::steady_clock::now() - started)
                                       .count();
            return {parse_chat_response(res->body), elapsed, attempt};
        } else if (retryable_status(res->status)) {
            last_failure = "HTTP " + std::to_string(res->status);
        } else {
            throw ProtocolError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512));
        }
        if (attempt < config_.retry.max_attempts) {
            log::warn("backend_retry", {{"attempt", attempt}, {"reason", last_failure}});
        }
    }
    throw BackendExhausted(config_.retry.max_attempts,
                           "gave up after " + std::to_string(config_.retry.max_attempts) +
                               " attempts; last failure: " + last_failure);
}

}  // namespace rwr
