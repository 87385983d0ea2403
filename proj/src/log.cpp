#include "rwr/log.hpp"

#include <chrono>
#include <mutex>
#include <ostream>

namespace rwr::log {

namespace {

struct State {
    std::mutex mu;
    std::shared_ptr<std::ostream> sink;
    Level min_level = Level::Info;
};

State& state() {
    static State s;
    return s;
}

const char* level_name(Level level) {
    switch (level) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
    }
    return "info";
}

}  // namespace

void set_sink(std::shared_ptr<std::ostream> sink, Level min_level) {
    auto& s = state();
    std::lock_guard lock(s.mu);
    s.sink = std::move(sink);
    s.min_level = min_level;
}

void clear_sink() { set_sink(nullptr); }

void emit(Level level, std::string_view event, nlohmann::json fields) {
    auto& s = state();
    std::lock_guard lock(s.mu);
    if (!s.sink || level < s.min_level) return;
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    nlohmann::ordered_json line;
    line["ts_ms"] = now;
    line["level"] = level_name(level);
    line["event"] = event;
    if (fields.is_object()) {
        for (auto& [k, v] : fields.items()) line[k] = v;
    }
    *s.sink << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    s.sink->flush();
}

}  // namespace rwr::log
