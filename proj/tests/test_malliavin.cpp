#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "adsens/error.hpp"
#include "adsens/lattice.hpp"
#include "adsens/malliavin.hpp"
#include "adsens/payoffs.hpp"
#include "adsens/sigma.hpp"

using namespace adsens;

namespace {

DiscretePath random_path(std::mt19937_64& rng, int steps, int dim, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    DiscretePath x(steps, dim);
    for (int n = 1; n <= steps; ++n) {
        for (int i = 0; i < dim; ++i) x.at(n, i) = x.at(n - 1, i) + normal(rng);
    }
    return x;
}

double tol(double v) { return std::max(1e-5, 1e-3 * std::abs(v)); }

std::vector<Payoff> smooth_payoffs() {
    return {payoffs::linear({0.7}),
            payoffs::asian_squared(),
            payoffs::quadratic_variation(),
            payoffs::cubic(1.0, 0.3),
            payoffs::merton(0.5, 0.01, 1.0, 1.0),
            payoffs::ito_utility(SigmaSpec::tanh(0.2, 0.05), UtilitySpec::logcosh()),
            payoffs::log_contract(SigmaSpec::tanh(0.3, -0.1))};
}

}  // namespace

TEST(Malliavin, LinearPayoffIsConstant) {
    std::mt19937_64 rng(1);
    const Payoff f = payoffs::linear({2.0, -1.0});
    const DiscretePath x = random_path(rng, 6, 2);
    for (auto backend : {MalliavinBackend::analytic(), MalliavinBackend::bump()}) {
        const GradientField d = discrete_malliavin(f, x, backend);
        for (int n = 1; n <= 6; ++n) {
            EXPECT_NEAR(d.at(n, 0), 2.0, 1e-9);
            EXPECT_NEAR(d.at(n, 1), -1.0, 1e-9);
        }
    }
}

TEST(Malliavin, AsianFormulaOnEveryWalkPath) {
    const int steps = 10;
    const PathEnumeration e = enumerate_paths(LatticeModel::binary_walk(steps));
    for (double strike : {-0.25, 0.3, 1.75}) {
        const Payoff f = payoffs::asian(strike);
        for (const auto& x : e.paths) {
            double avg = 0.0;
            for (int n = 0; n <= steps; ++n) avg += x.at(n, 0);
            avg /= steps + 1;
            const double indicator = avg >= strike ? 1.0 : 0.0;
            const GradientField a = discrete_malliavin(f, x, MalliavinBackend::analytic());
            const GradientField b = discrete_malliavin(f, x, MalliavinBackend::bump());
            for (int n = 1; n <= steps; ++n) {
                const double expected = (steps + 1.0 - n) / (steps + 1.0) * indicator;
                EXPECT_NEAR(a.at(n, 0), expected, 1e-14);
                // off the kink the central bump sees the same one-sided slope
                EXPECT_NEAR(b.at(n, 0), expected, 1e-8);
            }
        }
    }
}

TEST(Malliavin, AsianKinkIsFlagged) {
    const Payoff f = payoffs::asian(0.0);
    const DiscretePath on(2, 1, {0.0, 1.0, -1.0});
    const DiscretePath off(2, 1, {0.0, 1.0, 1.0});
    EXPECT_TRUE(f.at_kink(on, TimeGrid::integer(2)));
    EXPECT_FALSE(f.at_kink(off, TimeGrid::integer(2)));
    // convention 1{avg >= K}
    EXPECT_NEAR(discrete_malliavin(f, on).at(1, 0), 2.0 / 3.0, 1e-15);
}

TEST(Malliavin, QuadraticVariationGivesIncrements) {
    std::mt19937_64 rng(2);
    const Payoff f = payoffs::quadratic_variation();
    for (int trial = 0; trial < 20; ++trial) {
        const DiscretePath x = random_path(rng, 7, 2);
        const GradientField a = discrete_malliavin(f, x, MalliavinBackend::analytic());
        const GradientField b = discrete_malliavin(f, x, MalliavinBackend::bump());
        for (int n = 1; n <= 7; ++n) {
            for (int i = 0; i < 2; ++i) {
                const double dx = x.at(n, i) - x.at(n - 1, i);
                EXPECT_NEAR(a.at(n, i), dx, 1e-13);
                EXPECT_NEAR(b.at(n, i), dx, tol(dx));
            }
        }
    }
}

TEST(Malliavin, SuffixStructureOfAnalyticBackend) {
    std::mt19937_64 rng(3);
    for (const Payoff& f : smooth_payoffs()) {
        const DiscretePath x = random_path(rng, 8, 1, 0.5);
        const TimeGrid grid = TimeGrid::uniform(8, 1.0);
        GradientField partial(8, 1);
        f.gradient(x, grid, partial);
        const GradientField d = discrete_malliavin(f, x, grid, MalliavinBackend::analytic());
        EXPECT_EQ(d.at(8, 0), partial.at(8, 0)) << f.name;
        for (int n = 1; n < 8; ++n) EXPECT_EQ(d.at(n, 0), partial.at(n, 0) + d.at(n + 1, 0)) << f.name;
    }
}

TEST(Malliavin, AnalyticMatchesBumpOnSmoothPayoffs) {
    std::mt19937_64 rng(4);
    for (const Payoff& f : smooth_payoffs()) {
        for (int trial = 0; trial < 25; ++trial) {
            const DiscretePath x = random_path(rng, 6, 1, 0.4);
            const TimeGrid grid = TimeGrid::uniform(6, 1.5);
            const GradientField a = discrete_malliavin(f, x, grid, MalliavinBackend::analytic());
            const GradientField b = discrete_malliavin(f, x, grid, MalliavinBackend::bump());
            for (int n = 1; n <= 6; ++n) EXPECT_NEAR(a.at(n, 0), b.at(n, 0), tol(a.at(n, 0))) << f.name;
        }
    }
}

TEST(Malliavin, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(5);
    for (const Payoff& f : smooth_payoffs()) {
        const DiscretePath x = random_path(rng, 5, 1, 0.4);
        const TimeGrid grid = TimeGrid::uniform(5, 1.0);
        GradientField g(5, 1);
        f.gradient(x, grid, g);
        for (int k = 1; k <= 5; ++k) {
            DiscretePath up = x, down = x;
            up.at(k, 0) += 1e-6;
            down.at(k, 0) -= 1e-6;
            const double fd = (f(up, grid) - f(down, grid)) / 2e-6;
            EXPECT_NEAR(g.at(k, 0), fd, std::max(1e-6, 1e-4 * std::abs(fd))) << f.name << " k=" << k;
        }
    }
}

TEST(Malliavin, BumpOfConstantAndLinear) {
    std::mt19937_64 rng(6);
    const DiscretePath x = random_path(rng, 4, 2);
    const TimeGrid grid = TimeGrid::integer(4);
    Payoff constant;
    constant.name = "constant";
    constant.evaluate = [](const DiscretePath&, const TimeGrid&) { return 3.0; };
    const std::vector<double> e{0.6, 0.8};
    EXPECT_EQ(bump_derivative(constant, x, grid, 2, e, 1e-5), 0.0);
    const Payoff f = payoffs::linear({1.0, 2.0});
    EXPECT_NEAR(bump_derivative(f, x, grid, 3, e, 1e-3), 0.6 + 1.6, 1e-10);
    const GradientField d = discrete_malliavin(constant, x, grid);
    for (double v : d.data()) EXPECT_EQ(v, 0.0);
}

TEST(Malliavin, RichardsonImprovesCubicToSecondOrder) {
    const Payoff f = payoffs::cubic(1.0, 0.0);
    const DiscretePath x(2, 1, {0.0, 0.7, 1.3});
    const double exact = 3.0 * 1.3 * 1.3;
    // central differences of a cubic: error = eps^2 exactly (f''' = 6, / 6)
    const double eps = 1e-2;
    const double plain = discrete_malliavin(f, x, MalliavinBackend::bump(eps)).at(1, 0);
    EXPECT_NEAR(plain - exact, eps * eps, 1e-9);
    const double half = discrete_malliavin(f, x, MalliavinBackend::bump(eps / 2)).at(1, 0);
    EXPECT_NEAR((plain - exact) / (half - exact), 4.0, 1e-4);
    const double rich = discrete_malliavin(f, x, MalliavinBackend::bump(eps, true)).at(1, 0);
    EXPECT_NEAR(rich, exact, 1e-10);
}

TEST(Malliavin, Linearity) {
    std::mt19937_64 rng(7);
    const Payoff f = payoffs::asian_squared(), g = payoffs::cubic(0.5, 1.0);
    Payoff h;
    h.name = "combo";
    h.evaluate = [&](const DiscretePath& x, const TimeGrid& t) { return 2.0 * f(x, t) - 3.0 * g(x, t); };
    h.gradient = [&](const DiscretePath& x, const TimeGrid& t, GradientField& out) {
        GradientField a(x.steps(), 1), b(x.steps(), 1);
        f.gradient(x, t, a);
        g.gradient(x, t, b);
        for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = 2.0 * a.data()[k] - 3.0 * b.data()[k];
    };
    for (int trial = 0; trial < 10; ++trial) {
        const DiscretePath x = random_path(rng, 5, 1);
        for (auto backend : {MalliavinBackend::analytic(), MalliavinBackend::bump()}) {
            const GradientField dh = discrete_malliavin(h, x, backend);
            const GradientField df = discrete_malliavin(f, x, backend);
            const GradientField dg = discrete_malliavin(g, x, backend);
            for (int n = 1; n <= 5; ++n) {
                const double combo = 2.0 * df.at(n, 0) - 3.0 * dg.at(n, 0);
                EXPECT_NEAR(dh.at(n, 0), combo, tol(combo));
            }
        }
    }
}

TEST(GridMalliavin, TerminalFunctional) {
    // f = g(w_T) with g = sin: D_t f = cos(w_T) for every t
    Payoff f;
    f.name = "sin_terminal";
    f.evaluate = [](const DiscretePath& x, const TimeGrid&) { return std::sin(x.at(x.steps(), 0)); };
    std::mt19937_64 rng(8);
    const TimeGrid grid = TimeGrid::uniform(16, 2.0);
    const DiscretePath x = random_path(rng, 16, 1, 0.3);
    const GradientField d = grid_malliavin_ct(f, x, grid);
    for (int k = 1; k <= 16; ++k) EXPECT_NEAR(d.at(k, 0), std::cos(x.at(16, 0)), 1e-8);
}

TEST(GridMalliavin, TimeIntegralFunctional) {
    // f = int_0^T g(w_t) dt (trapezoid), g = w^2: D_t f = int_t^T 2 w_s ds on the same rule
    Payoff f;
    f.name = "integral";
    f.evaluate = [](const DiscretePath& x, const TimeGrid& grid) {
        double s = 0.0;
        for (int k = 1; k <= x.steps(); ++k) {
            s += 0.5 * grid.dt(k) * (x.at(k - 1, 0) * x.at(k - 1, 0) + x.at(k, 0) * x.at(k, 0));
        }
        return s;
    };
    std::mt19937_64 rng(9);
    const TimeGrid grid = TimeGrid::uniform(20, 1.0);
    const DiscretePath x = random_path(rng, 20, 1, 0.2);
    const GradientField d = grid_malliavin_ct(f, x, grid, MalliavinBackend::bump(1e-4));
    for (int k = 1; k <= 20; ++k) {
        // node t_k touches two intervals, the terminal node one
        double expected = 0.0;
        for (int j = k; j <= 20; ++j) expected += (j == 20 ? 0.5 : 1.0) * grid.dt(j) * 2.0 * x.at(j, 0);
        EXPECT_NEAR(d.at(k, 0), expected, 1e-7) << "k=" << k;
    }
}

TEST(Malliavin, NaNIsNumericalError) {
    Payoff f;
    f.name = "bad";
    f.evaluate = [](const DiscretePath& x, const TimeGrid&) { return std::log(x.at(1, 0)); };
    const DiscretePath x(1, 1, {0.0, -1.0});
    EXPECT_THROW(discrete_malliavin(f, x), NumericalError);
    EXPECT_THROW(discrete_malliavin(f, x, MalliavinBackend::analytic()), ValidationError);
}

TEST(Payoffs, ParseAndExpression) {
    EXPECT_EQ(payoffs::parse("asian:K=0.5").name, "asian");
    EXPECT_EQ(payoffs::parse("linear:a=1;2", 2).name, "linear");
    EXPECT_THROW(payoffs::parse("linear:a=1;2", 3), ValidationError);
    EXPECT_THROW(payoffs::parse("nope"), ValidationError);
    const Payoff e = payoffs::expression("pos(avg - 0.25) + 0.5 * x2^2 + max(x1, 0)");
    const DiscretePath x(2, 1, {0.0, 1.0, 2.0});
    EXPECT_NEAR(e(x, TimeGrid::integer(2)), (1.0 - 0.25) + 2.0 + 1.0, 1e-15);
    const Payoff asian = payoffs::asian(0.25);
    const Payoff as_expr = payoffs::expression("pos(avg - 0.25)");
    const PathEnumeration paths = enumerate_paths(LatticeModel::binary_walk(4));
    for (const auto& p : paths.paths) {
        const GradientField a = discrete_malliavin(asian, p), b = discrete_malliavin(as_expr, p);
        for (int n = 1; n <= 4; ++n) EXPECT_NEAR(a.at(n, 0), b.at(n, 0), 1e-8);
    }
    EXPECT_THROW(payoffs::expression("1 +"), ValidationError);
}
