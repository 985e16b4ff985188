#include "levym/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "levym/errors.hpp"

namespace levym {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// inline comments start at a # or ; that follows whitespace, so values such
// as paths containing '#' survive
std::string strip_inline_comment(const std::string& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if ((s[i] == '#' || s[i] == ';') && (s[i - 1] == ' ' || s[i - 1] == '\t'))
            return s.substr(0, i);
    return s;
}
}  // namespace

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double Config::get_num(const std::string& key, double fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const char* s = it->second.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') throw ConfigError(key, "not a number: '" + it->second + "'");
    return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const char* s = it->second.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0') throw ConfigError(key, "not an integer: '" + it->second + "'");
    return static_cast<std::int64_t>(v);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        t = trim(strip_inline_comment(t));
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno), "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno), "empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno), "expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno), "empty key");
        cfg.kv[section.empty() ? key : section + "." + key] = trim(t.substr(eq + 1));
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path, "cannot open file");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str(), path);
}

LevyModel Config::model() const {
    const double mu = get_num("model.mu", 0.0);
    const double sigma = get_num("model.sigma", 1.0);
    const double T = get_num("model.T", 1.0);
    JumpSpec jump;
    const std::string law = get_str("jump.law", "none");
    if (law == "none") {
        jump.law = JumpLaw::none;
    } else if (law == "two_point") {
        jump.law = JumpLaw::two_point;
        jump.z1 = get_num("jump.z1", 1.0);
        jump.z2 = get_num("jump.z2", -1.0);
        // a single given probability pins its complement
        jump.p1 = get_num("jump.p1", has("jump.p2") ? 1.0 - get_num("jump.p2", 0.5) : 0.5);
        jump.p2 = get_num("jump.p2", 1.0 - jump.p1);
    } else if (law == "gaussian") {
        jump.law = JumpLaw::gaussian;
        jump.mean = get_num("jump.mean", 0.0);
        jump.sd = get_num("jump.sd", 1.0);
    } else if (law == "uniform") {
        jump.law = JumpLaw::uniform;
        jump.lo = get_num("jump.lo", -1.0);
        jump.hi = get_num("jump.hi", 1.0);
    } else {
        throw ConfigError("jump.law", "unknown law '" + law + "'");
    }
    if (jump.law != JumpLaw::none) jump.intensity = get_num("jump.intensity", 1.0);
    return validate_model(mu, sigma, T, jump);
}

}  // namespace levym
