#pragma once

#include <functional>
#include <span>
#include <string>

#include "adsens/core.hpp"
#include "adsens/field.hpp"

namespace adsens {

/// A path functional f together with what is known about its derivatives.
struct Payoff {
    std::string name;
    std::function<double(const DiscretePath&, const TimeGrid&)> evaluate;
    /// Optional coordinate gradient: fills out(k, i) = d f / d x_k^i for k = 1..N.
    std::function<void(const DiscretePath&, const TimeGrid&, GradientField&)> gradient;
    /// Declared growth exponent, diagnostics only.
    double growth_p = 1.0;
    /// Optional: true when the path sits on a non-differentiable set of f (e.g. an Asian atom).
    std::function<bool(const DiscretePath&, const TimeGrid&)> at_kink;

    double operator()(const DiscretePath& x, const TimeGrid& grid) const { return evaluate(x, grid); }
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

struct MalliavinBackend {
    enum class Kind { automatic, analytic, bump };
    Kind kind = Kind::automatic;
    /// Bump size; <= 0 selects max(1e-5, 1e-7 * |x|_inf).
    double epsilon = 0.0;
    /// Combine steps eps and eps/2 as (4 D(eps/2) - D(eps)) / 3.
    bool richardson = false;

    static MalliavinBackend analytic() { return {Kind::analytic, 0.0, false}; }
    static MalliavinBackend bump(double eps = 0.0, bool richardson = false) { return {Kind::bump, eps, richardson}; }
};

double default_bump_step(const DiscretePath& x);

/// (f(x + eps e 1_[n..N]) - f(x - eps e 1_[n..N])) / (2 eps): the shift of x_n, ..., x_N by eps e.
double bump_derivative(const Payoff& f, const DiscretePath& x, const TimeGrid& grid, int n,
                       std::span<const double> direction, double eps);

/// D_n f(x) = sum_{k>=n} d_k f(x), n = 1..N.
///
/// The analytic backend takes suffix sums of the coordinate gradient; the bump backend shifts
/// the path from index n onwards along each basis direction. Throws NumericalError on NaN.
GradientField discrete_malliavin(const Payoff& f, const DiscretePath& x, const TimeGrid& grid,
                                 MalliavinBackend backend = {});

inline GradientField discrete_malliavin(const Payoff& f, const DiscretePath& x,
                                        MalliavinBackend backend = {}) {
    return discrete_malliavin(f, x, TimeGrid::integer(x.steps()), backend);
}

/// Continuous-time pathwise derivative D_{t_k} f on a time grid: the bump of 1_{[t_k, T]}.
/// Same machinery as the discrete operator; row k holds D_{t_k} f for k = 1..N.
GradientField grid_malliavin_ct(const Payoff& f, const DiscretePath& x, const TimeGrid& grid,
                                MalliavinBackend backend = {});

}  // namespace adsens
