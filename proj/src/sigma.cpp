#include "adsens/sigma.hpp"

#include <cmath>

#include "adsens/error.hpp"
#include "adsens/spec_parse.hpp"

namespace adsens {

SigmaSpec SigmaSpec::constant(double c) {
    SigmaSpec s;
    s.name = "const:" + std::to_string(c);
    s.value = [c](double, double) { return c; };
    s.dx = [](double, double) { return 0.0; };
    s.dxx = [](double, double) { return 0.0; };
    s.sup_value = std::abs(c);
    return s;
}

SigmaSpec SigmaSpec::tanh(double a, double b) {
    SigmaSpec s;
    s.name = "tanh:a=" + std::to_string(a) + ",b=" + std::to_string(b);
    s.value = [a, b](double, double x) { return a + b * std::tanh(x); };
    s.dx = [b](double, double x) {
        const double c = std::cosh(x);
        return b / (c * c);
    };
    s.dxx = [b](double, double x) {
        const double c = std::cosh(x);
        return -2.0 * b * std::tanh(x) / (c * c);
    };
    s.sup_value = std::abs(a) + std::abs(b);
    s.sup_dx = std::abs(b);
    s.sup_dxx = std::abs(b) * 4.0 / (3.0 * std::sqrt(3.0));
    return s;
}

SigmaSpec SigmaSpec::parse(const std::string& spec) {
    const FamilySpec f = parse_family(spec);
    if (f.family == "const") {
        const double c = f.positional.empty() ? f.number("c") : parse_number(f.positional, "const sigma");
        return constant(c);
    }
    if (f.family == "tanh") return tanh(f.number("a"), f.number("b"));
    throw ValidationError("unknown sigma family '" + f.family + "' (expected const or tanh)");
}

UtilitySpec UtilitySpec::linear(double alpha) {
    UtilitySpec u;
    u.name = "linear";
    u.value = [alpha](double x) { return alpha * x; };
    u.d1 = [alpha](double) { return alpha; };
    u.d2 = [](double) { return 0.0; };
    return u;
}

UtilitySpec UtilitySpec::quadratic(double alpha) {
    UtilitySpec u;
    u.name = "quad";
    u.value = [alpha](double x) { return 0.5 * alpha * x * x; };
    u.d1 = [alpha](double x) { return alpha * x; };
    u.d2 = [alpha](double) { return alpha; };
    u.sup_d2 = std::abs(alpha);
    return u;
}

UtilitySpec UtilitySpec::logcosh() {
    UtilitySpec u;
    u.name = "logcosh";
    u.value = [](double x) {
        const double a = std::abs(x);
        return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
    };
    u.d1 = [](double x) { return std::tanh(x); };
    u.d2 = [](double x) {
        const double c = std::cosh(x);
        return 1.0 / (c * c);
    };
    u.sup_d2 = 1.0;
    return u;
}

UtilitySpec UtilitySpec::parse(const std::string& spec) {
    const FamilySpec f = parse_family(spec);
    const double alpha = f.positional.empty() ? f.number("alpha", 1.0) : parse_number(f.positional, "alpha");
    if (f.family == "linear") return linear(alpha);
    if (f.family == "quad") return quadratic(alpha);
    if (f.family == "logcosh") return logcosh();
    throw ValidationError("unknown utility '" + f.family + "' (expected linear, quad or logcosh)");
}

}  // namespace adsens
