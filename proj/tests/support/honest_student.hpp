#pragma once

// A scripted student for key-value recall prompts. It summarizes a chunk to
// the needle sentence when the chunk holds it (else the refusal) and answers
// with the value when its context holds the needle (else the refusal). It
// reads the key from the query text only, never from hidden state.

#include <atomic>
#include <string>
#include <string_view>

#include "rwr/backend.hpp"
#include "rwr/prompts.hpp"

namespace rwr::testing {

inline constexpr std::string_view kExtractionTail = " Please extract a note relevant to the query:";

inline std::string key_after(std::string_view text, std::string_view marker) {
    const auto at = text.rfind(marker);
    if (at == std::string_view::npos) return {};
    const auto start = at + marker.size();
    const auto end = text.find('?', start);
    return std::string(text.substr(start, end == std::string_view::npos ? text.npos : end - start));
}

/// Returns the 6-digit value of "The code for <key> is <value>." in text, or
/// an empty string.
inline std::string value_for(std::string_view text, const std::string& key) {
    const std::string needle = "The code for " + key + " is ";
    const auto at = text.find(needle);
    if (key.empty() || at == std::string_view::npos) return {};
    const auto start = at + needle.size();
    const auto end = text.find('.', start);
    return std::string(text.substr(start, end - start));
}

inline std::string honest_reply(std::string_view prompt) {
    const std::string refusal{prompts::kDefaultRefusal};
    const bool summarize = prompt.size() >= kExtractionTail.size() &&
                           prompt.substr(prompt.size() - kExtractionTail.size()) == kExtractionTail;
    if (summarize) {
        const auto body = prompt.substr(0, prompt.size() - kExtractionTail.size());
        const auto key = key_after(body, "What is the code for ");
        const auto q = body.rfind(" What is the code for ");
        const auto chunk = body.substr(0, q == std::string_view::npos ? body.size() : q);
        const auto value = value_for(chunk, key);
        return value.empty() ? refusal : "The code for " + key + " is " + value + ".";
    }
    const auto q = prompt.rfind("Question: ");
    const auto key = key_after(prompt.substr(q == std::string_view::npos ? 0 : q), "What is the code for ");
    const auto value = value_for(prompt.substr(0, q == std::string_view::npos ? prompt.size() : q), key);
    return value.empty() ? refusal : value;
}

class HonestStudent final : public ChatBackend {
public:
    Completion complete(const ChatExchange& exchange) const override {
        ++calls_;
        return {honest_reply(exchange.last_user_message()), 0.0, 1};
    }

    std::size_t calls() const { return calls_.load(); }

private:
    mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace rwr::testing
