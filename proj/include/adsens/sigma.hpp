#pragma once

#include <functional>
#include <string>

namespace adsens {

/// Scalar state-dependent integrand sigma(t, x) with analytic x-partials (d = 1).
struct SigmaSpec {
    std::string name;
    std::function<double(double, double)> value;
    std::function<double(double, double)> dx;
    std::function<double(double, double)> dxx;
    double sup_value = 0.0;
    double sup_dx = 0.0;
    double sup_dxx = 0.0;

    static SigmaSpec constant(double c);
    /// a + b tanh(x)
    static SigmaSpec tanh(double a, double b);
    /// `const:0.2`, `tanh:a=0.2,b=0.05`
    static SigmaSpec parse(const std::string& spec);
};

/// U with first and second derivatives; U'' bounded.
struct UtilitySpec {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    double sup_d2 = 0.0;

    /// U(x) = alpha x
    static UtilitySpec linear(double alpha = 1.0);
    /// U(x) = alpha x^2 / 2
    static UtilitySpec quadratic(double alpha = 1.0);
    /// U(x) = log cosh(x)
    static UtilitySpec logcosh();
    /// `linear`, `quad`, `quad:alpha=2`, `logcosh`
    static UtilitySpec parse(const std::string& spec);
};

}  // namespace adsens
