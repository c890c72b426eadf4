#pragma once

#include <string>
#include <utility>
#include <vector>

namespace adsens {

/// Penalty shape L: [0, inf) -> [0, inf] with L(0) = 0, non-decreasing.
///
/// Callers apply the budget parametrization L_delta(s) = delta * L(s / delta); delta is never
/// stored here.
class Penalty {
public:
    enum class Family { indicator, power, table };

    /// 0 on [0, radius], +inf beyond.
    static Penalty indicator(double radius);
    /// kappa * u^m / m, m > 1.
    static Penalty power(double m, double kappa = 1.0);
    /// Piecewise-linear interpolation of convex samples (u_k, L_k) with u_0 = 0, L_0 = 0;
    /// extended linearly with the final slope beyond the last knot.
    static Penalty table(std::vector<std::pair<double, double>> knots);
    /// `indicator:1.0`, `power:m=3,kappa=1`, `table:file.csv` (two columns u,L).
    static Penalty parse(const std::string& spec);

    Family family() const { return family_; }
    double radius() const { return radius_; }
    double exponent() const { return m_; }
    double kappa() const { return kappa_; }
    std::string describe() const;

    /// L(u); +inf outside the indicator radius.
    double value(double u) const;
    /// Right derivative L'(u); +inf where L jumps to +inf.
    double slope(double u) const;
    /// L*(v) = sup_{u >= 0} {u v - L(u)}, v >= 0. May be +inf for tables.
    double conjugate(double v) const;
    /// A maximizer of u -> u r - L(u). Throws NumericalError when the sup is unbounded.
    double optimal_u(double r) const;

private:
    Family family_ = Family::indicator;
    double radius_ = 1.0;
    double m_ = 2.0;
    double kappa_ = 1.0;
    std::vector<std::pair<double, double>> knots_;
};

struct GrowthCheck {
    bool ok = true;
    std::string details;
};

/// liminf_{u -> inf} L(u) / u^p = +inf: symbolic for indicator and power, sampled for tables.
/// Never throws; a failure is a warning.
GrowthCheck validate_growth(const Penalty& penalty, double p);

}  // namespace adsens
