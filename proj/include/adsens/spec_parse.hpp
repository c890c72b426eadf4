#pragma once

// Small helpers for `family:key=value,key=value` configuration strings.

#include <map>
#include <string>
#include <vector>

namespace adsens {

struct FamilySpec {
    std::string family;
    /// Positional argument, e.g. the `1.0` in `indicator:1.0`; empty if absent.
    std::string positional;
    std::map<std::string, std::string> params;

    bool has(const std::string& key) const { return params.count(key) > 0; }
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
};

/// Splits `family:a=1,b=2` (or `family:1.5`). Throws ValidationError on malformed input.
FamilySpec parse_family(const std::string& spec);

double parse_number(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, char sep = ',');

}  // namespace adsens
