#include "scribe/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace scribe {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string &s, const std::string &where) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception &) {
    }
    throw std::invalid_argument(where + ": expected a number, got '" + s + "'");
}

} // namespace

ConfigFile ConfigFile::parse(std::string_view text, const std::string &source) {
    ConfigFile cfg;
    cfg.source_ = source;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": expected key=value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": empty key");
        if (!cfg.values_.emplace(key, value).second)
            throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                        ": duplicate key '" + key + "'");
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string ConfigFile::where(const std::string &key) const { return source_ + ": " + key; }

std::string ConfigFile::get(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument(source_ + ": missing key '" + key + "'");
    return it->second;
}

std::string ConfigFile::get(const std::string &key, const std::string &fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long ConfigFile::get_int(const std::string &key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string &s = it->second;
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument(where(key) + ": expected an integer, got '" + s + "'");
    return v;
}

double ConfigFile::get_double(const std::string &key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(it->second, where(key));
}

bool ConfigFile::get_bool(const std::string &key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string &s = it->second;
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw std::invalid_argument(where(key) + ": expected a boolean, got '" + s + "'");
}

std::vector<int> ConfigFile::get_int_list(const std::string &key, std::vector<int> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        int v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || p != t.data() + t.size())
            throw std::invalid_argument(where(key) + ": expected integers, got '" +
                                        it->second + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument(where(key) + ": empty list");
    return out;
}

ClipRange ConfigFile::get_clip(const std::string &key, ClipRange fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string &s = it->second;
    if (s == "none" || s == "off") return {};
    const auto comma = s.find(',');
    ClipRange r;
    if (comma == std::string::npos) {
        const double b = parse_double(trim(s), where(key));
        r = {-b, b};
    } else {
        r = {parse_double(trim(s.substr(0, comma)), where(key)),
             parse_double(trim(s.substr(comma + 1)), where(key))};
    }
    if (!(r.lo <= r.hi)) throw std::invalid_argument(where(key) + ": clip range is not ordered");
    return r;
}

void ConfigFile::check_known(const std::set<std::string> &known) const {
    for (const auto &[k, v] : values_)
        if (!known.count(k)) throw std::invalid_argument(source_ + ": unknown key '" + k + "'");
}

} // namespace scribe
