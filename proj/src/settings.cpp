#include "rwr/settings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rwr/error.hpp"

namespace rwr::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string parse_quoted(std::string_view s, std::size_t line) {
    // s starts with '"'
    std::string out;
    std::size_t i = 1;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '"') break;
        if (c == '\\') {
            if (++i >= s.size()) throw ParseError(line, "dangling escape");
            switch (s[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: throw ParseError(line, std::string("unknown escape \\") + s[i]);
            }
            continue;
        }
        out.push_back(c);
    }
    if (i >= s.size()) throw ParseError(line, "unterminated string");
    const auto rest = trim(s.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') throw ParseError(line, "trailing characters after string");
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* type) {
    throw InvalidArgument("setting " + key + " = '" + value + "' is not a valid " + type);
}

}  // namespace

std::string Settings::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string Settings::require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) throw InvalidArgument("missing required setting " + key);
    return it->second;
}

std::int64_t Settings::get_int(const std::string& key) const {
    const auto v = require(key);
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "integer");
    return out;
}

std::uint64_t Settings::get_u64(const std::string& key) const {
    const auto v = require(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "unsigned integer");
    return out;
}

double Settings::get_double(const std::string& key) const {
    const auto v = require(key);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) bad_value(key, v, "number");
        return out;
    } catch (const std::logic_error&) {
        bad_value(key, v, "number");
    }
}

bool Settings::get_bool(const std::string& key) const {
    const auto v = require(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "boolean");
}

std::string Settings::role_get(std::string_view role, std::string_view key, const std::string& fallback) const {
    const std::string scoped = std::string(role) + "." + std::string(key);
    if (auto it = values_.find(scoped); it != values_.end()) return it->second;
    return get("backend." + std::string(key), fallback);
}

bool Settings::role_has(std::string_view role, std::string_view key) const {
    const auto v = role_get(role, key);
    return !v.empty();
}

void Settings::merge(const Settings& over) {
    for (const auto& [k, v] : over.values_) values_[k] = v;
}

nlohmann::ordered_json Settings::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
}

Settings Settings::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("settings must be a JSON object");
    Settings s;
    for (const auto& [k, v] : j.items()) {
        s.set(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return s;
}

Settings parse_config(std::string_view text) {
    Settings out;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ParseError(line_no, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const auto key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "empty key");
        auto value_text = trim(std::string_view(line).substr(eq + 1));
        std::string value;
        if (!value_text.empty() && value_text.front() == '"') {
            value = parse_quoted(value_text, line_no);
        } else {
            const auto hash = value_text.find('#');
            value = trim(std::string_view(value_text).substr(0, hash));
        }
        out.set(section.empty() ? key : section + "." + key, std::move(value));
    }
    return out;
}

Settings load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::parse_error& err) {
            throw ParseError(1, err.what());
        }
        return Settings::from_json(j.contains("settings") ? j["settings"] : j);
    }
    return parse_config(buf.str());
}

}  // namespace rwr::cli
