#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scribe/lstm.hpp"

namespace scribe {

// Flat key=value configuration. '#' starts a comment; blank lines are
// ignored; keys may appear once.
class ConfigFile {
  public:
    static ConfigFile parse(std::string_view text, const std::string &source = "<config>");
    static ConfigFile load(const std::filesystem::path &path);

    bool has(const std::string &key) const { return values_.count(key) != 0; }
    void set(const std::string &key, const std::string &value) { values_[key] = value; }

    std::string get(const std::string &key) const; // throws if missing
    std::string get(const std::string &key, const std::string &fallback) const;
    long long get_int(const std::string &key, long long fallback) const;
    double get_double(const std::string &key, double fallback) const;
    bool get_bool(const std::string &key, bool fallback) const;
    // Comma-separated integers, e.g. "400,400,400".
    std::vector<int> get_int_list(const std::string &key, std::vector<int> fallback) const;
    // "lo,hi", a single "b" meaning [-b, b], or "none".
    ClipRange get_clip(const std::string &key, ClipRange fallback) const;

    // Throws std::invalid_argument naming the first key not in `known`.
    void check_known(const std::set<std::string> &known) const;

    const std::map<std::string, std::string> &values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
    std::string source_;
    std::string where(const std::string &key) const;
};

} // namespace scribe
