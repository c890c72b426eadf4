#include "adsens/spec_parse.hpp"

#include <cmath>
#include <sstream>

#include "adsens/error.hpp"

namespace adsens {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

double parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ValidationError("expected a number for " + what + ", got '" + text + "'");
    }
    if (used != t.size()) throw ValidationError("trailing characters in " + what + ": '" + text + "'");
    return v;
}

std::vector<double> parse_number_list(const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!trim(item).empty()) out.push_back(parse_number(item, "list entry"));
    }
    if (out.empty()) throw ValidationError("empty number list '" + text + "'");
    return out;
}

FamilySpec parse_family(const std::string& spec) {
    FamilySpec out;
    const auto colon = spec.find(':');
    out.family = trim(spec.substr(0, colon));
    if (out.family.empty()) throw ValidationError("missing family name in '" + spec + "'");
    if (colon == std::string::npos) return out;
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            if (!out.positional.empty()) throw ValidationError("more than one positional value in '" + spec + "'");
            out.positional = item;
        } else {
            out.params[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
        }
    }
    return out;
}

double FamilySpec::number(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw ValidationError("'" + family + "' needs parameter " + key);
    return parse_number(it->second, family + "." + key);
}

double FamilySpec::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

long long FamilySpec::integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v != std::floor(v)) throw ValidationError(family + "." + key + " must be an integer");
    return static_cast<long long>(v);
}

std::string FamilySpec::text(const std::string& key, const std::string& fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

}  // namespace adsens
