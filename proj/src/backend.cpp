#include "rwr/backend.hpp"

#include <fstream>

#include <json.hpp>

#include "rwr/error.hpp"

namespace rwr {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

ChatExchange ChatExchange::user(std::string content) {
    ChatExchange ex;
    ex.messages.push_back({Role::User, std::move(content)});
    return ex;
}

void ChatExchange::validate() const {
    if (messages.empty()) throw InvalidArgument("chat exchange has no messages");
    if (messages.back().role != Role::User) {
        throw InvalidArgument("last message of a chat exchange must be a user turn");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw InvalidArgument("temperature must lie in [0, 2]");
    }
    if (max_new <= 0) throw InvalidArgument("max_new must be positive");
}

MockBackend::MockBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {
    if (rules_.empty()) throw InvalidArgument("mock backend needs at least the default rule");
    if (!rules_.back().match_contains.empty()) {
        throw InvalidArgument("last mock rule must be the default rule with an empty match");
    }
}

MockBackend MockBackend::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open mock rules " + path.string());
    std::vector<MockRule> rules;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& err) {
            throw ParseError(number, err.what());
        }
        if (!j.is_object() || !j.contains("match_contains") || !j.contains("response") ||
            !j["match_contains"].is_string() || !j["response"].is_string()) {
            throw ParseError(number, "mock rule needs string fields match_contains and response");
        }
        rules.push_back({j["match_contains"].get<std::string>(), j["response"].get<std::string>()});
    }
    if (rules.empty() || !rules.back().match_contains.empty()) {
        throw ParseError(number, "last mock rule must be the default rule with \"match_contains\": \"\"");
    }
    return MockBackend(std::move(rules));
}

Completion MockBackend::complete(const ChatExchange& exchange) const {
    exchange.validate();
    const auto& message = exchange.last_user_message();
    for (const auto& rule : rules_) {
        if (message.find(rule.match_contains) != std::string::npos) {
            return {rule.response, 0.0, 1};
        }
    }
    return {rules_.back().response, 0.0, 1};
}

Completion ScriptedBackend::complete(const ChatExchange& exchange) const {
    exchange.validate();
    return {responder_(exchange), 0.0, 1};
}

const Completion& BatchItem::value() const {
    if (!completion) std::rethrow_exception(error);
    return *completion;
}

std::string BatchItem::error_kind() const {
    if (!error) return {};
    try {
        std::rethrow_exception(error);
    } catch (const Error& err) {
        return err.kind();
    } catch (...) {
        return "InternalError";
    }
}

std::string BatchItem::error_message() const {
    if (!error) return {};
    try {
        std::rethrow_exception(error);
    } catch (const std::exception& err) {
        return err.what();
    } catch (...) {
        return "unknown error";
    }
}

std::vector<BatchItem> complete_batch(const ChatBackend& backend,
                                      std::span<const ChatExchange> exchanges,
                                      std::size_t parallelism) {
    if (parallelism == 0) throw InvalidArgument("parallelism must be at least 1");
    std::vector<BatchItem> out(exchanges.size());
    parallel_for(exchanges.size(), parallelism, [&](std::size_t i) {
        try {
            out[i].completion = backend.complete(exchanges[i]);
        } catch (...) {
            out[i].error = std::current_exception();
        }
    });
    return out;
}

}  // namespace rwr
