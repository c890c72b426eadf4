#include "adsens/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "adsens/error.hpp"

namespace adsens {

namespace {

GradientField analytic_field(const Payoff& f, const DiscretePath& x, const TimeGrid& grid) {
    if (!f.has_gradient()) {
        throw ValidationError("payoff '" + f.name + "' has no analytic gradient; use the bump backend");
    }
    GradientField partials(x.steps(), x.dim());
    f.gradient(x, grid, partials);
    // suffix sums in place: D_N = d_N, D_n = d_n + D_{n+1}
    for (int n = x.steps() - 1; n >= 1; --n) {
        for (int i = 0; i < x.dim(); ++i) partials.at(n, i) += partials.at(n + 1, i);
    }
    return partials;
}

GradientField bump_field(const Payoff& f, const DiscretePath& x, const TimeGrid& grid, double eps) {
    GradientField out(x.steps(), x.dim());
    DiscretePath work = x;
    for (int i = 0; i < x.dim(); ++i) {
        for (int n = 1; n <= x.steps(); ++n) {
            for (int k = n; k <= x.steps(); ++k) work.at(k, i) = x.at(k, i) + eps;
            const double up = f.evaluate(work, grid);
            for (int k = n; k <= x.steps(); ++k) work.at(k, i) = x.at(k, i) - eps;
            const double down = f.evaluate(work, grid);
            for (int k = n; k <= x.steps(); ++k) work.at(k, i) = x.at(k, i);
            out.at(n, i) = (up - down) / (2.0 * eps);
        }
    }
    return out;
}

void check_finite(const GradientField& g, const Payoff& f) {
    for (double v : g.data()) {
        if (!std::isfinite(v)) throw NumericalError("non-finite Malliavin derivative for payoff '" + f.name + "'");
    }
}

}  // namespace

double default_bump_step(const DiscretePath& x) {
    return std::max(1e-5, 1e-7 * x.sup_norm());
}

double bump_derivative(const Payoff& f, const DiscretePath& x, const TimeGrid& grid, int n,
                       std::span<const double> direction, double eps) {
    if (n < 1 || n > x.steps()) throw ValidationError("bump index must lie in 1..N");
    if (static_cast<int>(direction.size()) != x.dim()) throw ValidationError("bump direction has wrong dimension");
    DiscretePath up = x;
    DiscretePath down = x;
    for (int k = n; k <= x.steps(); ++k) {
        for (int i = 0; i < x.dim(); ++i) {
            up.at(k, i) += eps * direction[i];
            down.at(k, i) -= eps * direction[i];
        }
    }
    return (f.evaluate(up, grid) - f.evaluate(down, grid)) / (2.0 * eps);
}

GradientField discrete_malliavin(const Payoff& f, const DiscretePath& x, const TimeGrid& grid,
                                 MalliavinBackend backend) {
    if (grid.steps() != x.steps()) throw ValidationError("time grid and path disagree on N");
    using Kind = MalliavinBackend::Kind;
    const bool use_analytic =
        backend.kind == Kind::analytic || (backend.kind == Kind::automatic && f.has_gradient());
    GradientField out;
    if (use_analytic) {
        out = analytic_field(f, x, grid);
    } else {
        const double eps = backend.epsilon > 0.0 ? backend.epsilon : default_bump_step(x);
        out = bump_field(f, x, grid, eps);
        if (backend.richardson) {
            const GradientField half = bump_field(f, x, grid, 0.5 * eps);
            for (std::size_t k = 0; k < out.data().size(); ++k) {
                out.data()[k] = (4.0 * half.data()[k] - out.data()[k]) / 3.0;
            }
        }
    }
    check_finite(out, f);
    return out;
}

GradientField grid_malliavin_ct(const Payoff& f, const DiscretePath& x, const TimeGrid& grid,
                                MalliavinBackend backend) {
    return discrete_malliavin(f, x, grid, backend);
}

}  // namespace adsens
