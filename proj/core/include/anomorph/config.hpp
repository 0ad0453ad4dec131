#pragma once

#include <map>
#include <set>
#include <string>

namespace anomorph {

// Flat key=value config file: one `key = value` per line, '#' comments,
// blank lines ignored. All typed getters throw validation_error on
// malformed values; `expect_known` rejects unrecognized keys so typos fail
// loudly instead of silently using defaults.
class Config {
public:
    Config() = default;
    static Config load(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    double get_float(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void expect_known(const std::set<std::string>& known) const;
    const std::map<std::string, std::string>& raw() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace anomorph
