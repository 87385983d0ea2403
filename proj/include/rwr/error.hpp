#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rwr {

/// Base class for every domain error raised by the library. `kind()` is the
/// stable machine-readable name surfaced in CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message);

    const std::string& kind() const noexcept { return kind_; }

    /// Structured form: {"error": kind, "message": what(), ...extra}.
    virtual nlohmann::json to_json() const;

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }
    nlohmann::json to_json() const override;

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("IoError", message) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("InvalidArgument", message) {}
};

class QueryTooLong : public Error {
public:
    explicit QueryTooLong(const std::string& message) : Error("QueryTooLong", message) {}
};

class BackendExhausted : public Error {
public:
    BackendExhausted(int attempts, const std::string& message);
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& message) : Error("ProtocolError", message) {}
};

class EmptyLocatorReply : public Error {
public:
    explicit EmptyLocatorReply(const std::string& message) : Error("EmptyLocatorReply", message) {}
};

class AllParagraphsRemoved : public Error {
public:
    explicit AllParagraphsRemoved(const std::string& message)
        : Error("AllParagraphsRemoved", message) {}
};

class MissingBinding : public Error {
public:
    explicit MissingBinding(const std::string& message) : Error("MissingBinding", message) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& message) : Error("EmptyInput", message) {}
};

}  // namespace rwr
