#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mfc {

/**
 * Flat key-value configuration with INI-style sections.
 *
 *   schema_version = 1
 *   [channel.1]
 *   kp = 0.5          # comment
 *
 * Keys are addressed as "<section>.<key>" ("channel.1.kp"); keys before
 * the first section have no prefix. Every lookup marks the key as used so
 * callers can reject typos via unused_keys().
 */
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, const std::string& source = "<string>");
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    // "key=value", as given on the command line.
    void apply_override(std::string_view assignment);

    bool contains(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Distinct "<prefix><name>" section names, e.g. prefix "channel." -> {"channel.1", "channel.2"}.
    std::vector<std::string> sections_with_prefix(const std::string& prefix) const;
    std::vector<std::string> unused_keys() const;
    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::map<std::string, std::string> values_;
    std::set<std::string> sections_;
    mutable std::set<std::string> used_;
};

double parse_double(std::string_view text, std::string_view what);
std::vector<std::string> split_list(std::string_view text, char separator);

}  // namespace mfc
