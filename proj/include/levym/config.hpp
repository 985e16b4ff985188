#pragma once
#include <cstdint>
#include <map>
#include <string>

#include "levym/model.hpp"

namespace levym {

// Flat INI-style configuration: [section] headers, key = value lines, blank
// lines and #/; comments ignored (inline comments start at a marker that
// follows whitespace).  Keys are addressed as "section.key"; look-ups and
// conversions raise ConfigError naming the offending key.
struct Config {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>");
    static Config parse_file(const std::string& path);

    // Builds the model from the [model] and [jump] sections; defaults are
    // mu = 0, sigma = 1, T = 1 and no jumps.
    LevyModel model() const;
};

}  // namespace levym
