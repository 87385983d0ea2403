#include "rwr/error.hpp"

namespace rwr {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

nlohmann::json Error::to_json() const {
    return nlohmann::json{{"error", kind_}, {"message", what()}};
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error("ParseError", "line " + std::to_string(line) + ": " + message), line_(line) {}

nlohmann::json ParseError::to_json() const {
    auto j = Error::to_json();
    j["line"] = line_;
    return j;
}

BackendExhausted::BackendExhausted(int attempts, const std::string& message)
    : Error("BackendExhausted", message), attempts_(attempts) {}

}  // namespace rwr
