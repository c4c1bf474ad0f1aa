#include "mfc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mfc/errors.hpp"

namespace mfc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError("config: '" + std::string(what) + "' is not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string> split_list(std::string_view text, char separator) {
    std::vector<std::string> out;
    if (trim(text).empty()) {
        return out;
    }
    std::size_t begin = 0;
    while (true) {
        const auto end = text.find(separator, begin);
        out.emplace_back(trim(text.substr(begin, end == std::string_view::npos ? text.npos : end - begin)));
        if (end == std::string_view::npos) {
            break;
        }
        begin = end + 1;
    }
    return out;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
    KeyValueConfig cfg;
    cfg.source_ = source;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(where + ": malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            cfg.sections_.insert(section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(where + ": empty key");
        }
        std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (cfg.values_.contains(full)) {
            throw ConfigError(where + ": duplicate key '" + full + "'");
        }
        cfg.values_.emplace(std::move(full), std::string(trim(line.substr(eq + 1))));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("config: cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    if (const auto dot = key.rfind('.'); dot != std::string::npos) {
        sections_.insert(key.substr(0, dot));
    }
}

void KeyValueConfig::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || trim(assignment.substr(0, eq)).empty()) {
        throw ConfigError("override: expected key=value, got '" + std::string(assignment) + "'");
    }
    set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

bool KeyValueConfig::contains(const std::string& key) const { return values_.contains(key); }

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    used_.insert(key);
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    auto v = find(key);
    if (!v) {
        throw ConfigError(source_ + ": missing required key '" + key + "'");
    }
    return *v;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key) const { return parse_double(get_string(key), key); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto v = find(key);
    return v ? parse_double(*v, key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto v = find(key);
    if (!v) {
        return fallback;
    }
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw ConfigError(source_ + ": '" + key + "' is not an integer: '" + *v + "'");
    }
    return out;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto v = find(key);
    if (!v) {
        return fallback;
    }
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
        throw ConfigError(source_ + ": '" + key + "' is not an unsigned integer: '" + *v + "'");
    }
    return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto v = find(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no") {
        return false;
    }
    throw ConfigError(source_ + ": '" + key + "' is not a boolean: '" + *v + "'");
}

std::vector<std::string> KeyValueConfig::sections_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const std::string& s : sections_) {
        if (s.rfind(prefix, 0) == 0 && s.find('.', prefix.size()) == std::string::npos) {
            out.push_back(s);
        }
    }
    return out;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        if (!used_.contains(key)) {
            out.push_back(key);
        }
    }
    return out;
}

}  // namespace mfc
