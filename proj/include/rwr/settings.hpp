#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace rwr::cli {

/// Flat, namespaced key -> value settings ("backend.url", "ssa.chunk_units").
/// Later layers override earlier ones: defaults < config file < flags.
class Settings {
public:
    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
    void erase(const std::string& key) { values_.erase(key); }
    bool has(const std::string& key) const { return values_.contains(key); }

    std::string get(const std::string& key, const std::string& fallback = {}) const;
    /// Throws InvalidArgument when absent or empty.
    std::string require(const std::string& key) const;

    std::int64_t get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// "<role>.<key>" if set, else "backend.<key>", else fallback.
    std::string role_get(std::string_view role, std::string_view key, const std::string& fallback = {}) const;
    bool role_has(std::string_view role, std::string_view key) const;

    void merge(const Settings& over);

    const std::map<std::string, std::string>& values() const { return values_; }

    nlohmann::ordered_json to_json() const;
    static Settings from_json(const nlohmann::json& j);

private:
    std::map<std::string, std::string> values_;
};

/// TOML-style key = value text. `[section]` headers prefix following keys
/// with "section."; values are bare tokens or double-quoted strings; '#'
/// starts a comment. Throws ParseError.
Settings parse_config(std::string_view text);

/// A .json file is read as a run manifest (its "settings" object); anything
/// else as key = value text.
Settings load_config(const std::filesystem::path& path);

}  // namespace rwr::cli
