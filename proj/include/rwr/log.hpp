#pragma once

#include <iosfwd>
#include <memory>
#include <string_view>

#include <json.hpp>

// Process-wide JSON-lines event log. Silent until a sink is installed.
namespace rwr::log {

enum class Level { Debug, Info, Warn, Error };

void set_sink(std::shared_ptr<std::ostream> sink, Level min_level = Level::Info);
void clear_sink();

void emit(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    emit(Level::Info, event, std::move(fields));
}
inline void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    emit(Level::Warn, event, std::move(fields));
}

}  // namespace rwr::log
