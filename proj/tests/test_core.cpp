#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "adsens/core.hpp"
#include "adsens/ensemble.hpp"
#include "adsens/error.hpp"
#include "adsens/lattice.hpp"

using namespace adsens;

namespace {

DiscretePath random_path(std::mt19937_64& rng, int steps, int dim) {
    std::normal_distribution<double> normal(0.0, 3.0);
    DiscretePath x(steps, dim);
    for (int n = 1; n <= steps; ++n) {
        for (int i = 0; i < dim; ++i) x.at(n, i) = normal(rng);
    }
    return x;
}

}  // namespace

TEST(Increment, HandExample) {
    const DiscretePath x(3, 1, {0, 1, 3, 2});
    const DiscretePath dx = increment(x);
    EXPECT_EQ(dx.data(), (std::vector<double>{0, 1, 2, -1}));
    EXPECT_EQ(cumulate(dx), x);
}

TEST(Increment, ZeroPath) {
    const DiscretePath z = DiscretePath::zero(5, 2);
    EXPECT_EQ(increment(z), z);
}

TEST(Increment, RoundTripRandom) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const DiscretePath x = random_path(rng, 1 + trial % 12, 1 + trial % 3);
        const DiscretePath back = cumulate(increment(x));
        for (std::size_t k = 0; k < x.data().size(); ++k) {
            EXPECT_NEAR(back.data()[k], x.data()[k], 1e-14 * std::max(1.0, std::abs(x.data()[k])));
        }
    }
}

TEST(DiscretePath, RejectsNonzeroStart) {
    EXPECT_THROW(DiscretePath(2, 1, {1, 0, 0}), ValidationError);
}

TEST(Cost, IdentityAndTwoStepExample) {
    const CostSpec spec(2.0);
    const DiscretePath x(2, 1, {0, 1, 1});
    const DiscretePath y = DiscretePath::zero(2, 1);
    EXPECT_EQ(cost_cn(x, x, spec), 0.0);
    EXPECT_DOUBLE_EQ(cost_cn(x, y, spec), 1.0);
    EXPECT_DOUBLE_EQ(cost_cn(DiscretePath(2, 1, {0, 1, -1}), y, spec), 5.0);
}

TEST(Cost, HyperbolicScaling) {
    std::mt19937_64 rng(3);
    const DiscretePath x = random_path(rng, 4, 1), y = random_path(rng, 4, 1);
    const double plain = cost_cn(x, y, CostSpec(2.0));
    EXPECT_NEAR(cost_cn(x, y, CostSpec(2.0, Scaling::hyperbolic, 1.0)), 4.0 * plain, 1e-12 * plain);
    // N^{p-1} / T^{p-1} with p = 3, N = 4, T = 2
    EXPECT_NEAR(cost_cn(x, y, CostSpec(3.0, Scaling::hyperbolic, 2.0)), 4.0 * cost_cn(x, y, CostSpec(3.0)), 1e-9);
}

TEST(Cost, SymmetricAndZeroOnlyForEqualIncrements) {
    std::mt19937_64 rng(5);
    for (double p : {1.3, 2.0, 3.5}) {
        const CostSpec spec(p);
        for (int trial = 0; trial < 50; ++trial) {
            const DiscretePath x = random_path(rng, 6, 2), y = random_path(rng, 6, 2);
            EXPECT_DOUBLE_EQ(cost_cn(x, y, spec), cost_cn(y, x, spec));
            EXPECT_GT(cost_cn(x, y, spec), 0.0);
        }
    }
}

TEST(Cost, ParabolicNeedsP2) {
    EXPECT_THROW(CostSpec(3.0, Scaling::parabolic), ValidationError);
    EXPECT_THROW(CostSpec(1.0), ValidationError);
    EXPECT_DOUBLE_EQ(CostSpec(3.0).q(), 1.5);
    EXPECT_DOUBLE_EQ(1.0 / CostSpec(4.0).p() + 1.0 / CostSpec(4.0).q(), 1.0);
}

TEST(Enumerate, SingleStep) {
    const PathEnumeration e = enumerate_paths(LatticeModel::binary_walk(1));
    ASSERT_EQ(e.paths.size(), 2u);
    EXPECT_EQ(e.paths[0].data(), (std::vector<double>{0, 1}));
    EXPECT_EQ(e.paths[1].data(), (std::vector<double>{0, -1}));
    EXPECT_DOUBLE_EQ(e.probabilities[0], 0.5);
    EXPECT_DOUBLE_EQ(e.probabilities[1], 0.5);
}

TEST(Enumerate, TenStepWalk) {
    const PathEnumeration e = enumerate_paths(LatticeModel::binary_walk(10));
    ASSERT_EQ(e.paths.size(), 1024u);
    for (double p : e.probabilities) EXPECT_DOUBLE_EQ(p, std::ldexp(1.0, -10));
}

TEST(Enumerate, ProbabilitiesAreEdgeProducts) {
    const LatticeModel model = LatticeModel::iid_walk(5, {-1.0, 0.5, 2.0}, {0.2, 0.5, 0.3});
    const PathEnumeration e = enumerate_paths(model);
    double total = 0.0;
    for (std::size_t m = 0; m < e.paths.size(); ++m) {
        double product = 1.0;
        for (int n = 1; n <= 5; ++n) {
            const auto& parent = model.node(e.nodes[m][static_cast<std::size_t>(n - 1)]);
            for (const auto& [child, prob] : parent.children) {
                if (child == e.nodes[m][static_cast<std::size_t>(n)]) product *= prob;
            }
        }
        EXPECT_NEAR(e.probabilities[m], product, 1e-15);
        total += e.probabilities[m];
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(Enumerate, SizeGuard) {
    EXPECT_THROW(LatticeModel::binary_walk(21), ValidationError);
}

TEST(Martingale, SymmetricAndDriftedWalks) {
    const MartingaleCheck sym = check_martingale(LatticeModel::binary_walk(4));
    EXPECT_TRUE(sym.ok);
    EXPECT_EQ(sym.worst_violation, 0.0);
    const MartingaleCheck drift = check_martingale(LatticeModel::binary_walk(4, 1.0, 0.6));
    EXPECT_FALSE(drift.ok);
    EXPECT_NEAR(drift.worst_violation, 0.2, 1e-12);
}

TEST(Lattice, ValidationErrors) {
    std::vector<LatticeNode> nodes(3);
    nodes[0].state = {0.0};
    nodes[1].state = {1.0};
    nodes[1].time = 1;
    nodes[2].state = {-1.0};
    nodes[2].time = 1;
    nodes[0].children = {{1, 0.5}, {2, 0.4}};
    EXPECT_THROW(LatticeModel(1, nodes, false), ValidationError);
    nodes[0].children = {{1, 0.6}, {2, 0.4}};
    EXPECT_NO_THROW(LatticeModel(1, nodes, false));
    EXPECT_THROW(LatticeModel(1, nodes, true), ValidationError);
    nodes[0].state = {1.0};
    EXPECT_THROW(LatticeModel(1, nodes, false), ValidationError);
}

TEST(Lattice, JsonRoundTrip) {
    const LatticeModel model = LatticeModel::iid_walk(3, {-1.0, 2.0}, {2.0 / 3.0, 1.0 / 3.0});
    const LatticeModel back = LatticeModel::from_json(model.to_json());
    EXPECT_EQ(back.size(), model.size());
    EXPECT_EQ(back.is_martingale(), model.is_martingale());
    const PathEnumeration a = enumerate_paths(model), b = enumerate_paths(back);
    ASSERT_EQ(a.paths.size(), b.paths.size());
    for (std::size_t m = 0; m < a.paths.size(); ++m) {
        EXPECT_EQ(a.paths[m], b.paths[m]);
        EXPECT_DOUBLE_EQ(a.probabilities[m], b.probabilities[m]);
    }
    EXPECT_THROW(LatticeModel::from_json("{\"dim\": 1}"), ValidationError);
}

TEST(Brownian, MomentsOfTerminalValue) {
    const double horizon = 2.0;
    const std::size_t count = 200000;
    const SampleEnsemble e = sample_brownian(horizon, 8, 1, count, 42);
    double mean = 0.0, second = 0.0, qv = 0.0;
    for (const auto& x : e.paths()) {
        const double xt = x.at(8, 0);
        mean += xt;
        second += xt * xt;
        for (int n = 1; n <= 8; ++n) qv += std::pow(x.at(n, 0) - x.at(n - 1, 0), 2);
    }
    mean /= count;
    second /= count;
    qv /= count;
    const double var = second - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(horizon / count));
    EXPECT_NEAR(var, horizon, 4.0 * horizon * std::sqrt(2.0 / count));
    // E sum |dX|^2 = T; per-path variance of the sum is 2 T^2 / N
    EXPECT_NEAR(qv, horizon, 4.0 * std::sqrt(2.0 * horizon * horizon / 8.0 / count));
}

TEST(Brownian, DeterministicUnderSeed) {
    const SampleEnsemble a = sample_brownian(1.0, 16, 2, 500, 9);
    const SampleEnsemble b = sample_brownian(1.0, 16, 2, 500, 9);
    const SampleEnsemble c = sample_brownian(1.0, 16, 2, 500, 10);
    EXPECT_EQ(a.paths(), b.paths());
    EXPECT_NE(a.paths(), c.paths());
    // paths do not depend on how many others are drawn
    const SampleEnsemble prefix = sample_brownian(1.0, 16, 2, 10, 9);
    for (std::size_t m = 0; m < 10; ++m) EXPECT_EQ(prefix.path(m), a.path(m));
}

TEST(Ensemble, CsvRoundTripAndCoarsen) {
    const SampleEnsemble e = sample_brownian(1.0, 4, 2, 3, 1);
    std::stringstream buf;
    e.write_csv(buf);
    EXPECT_EQ(buf.str().substr(0, buf.str().find('\n')), "path_id,t,x_1,x_2");
    const SampleEnsemble back = SampleEnsemble::read_csv(buf, 1);
    EXPECT_EQ(back.paths(), e.paths());
    EXPECT_EQ(back.grid(), e.grid());
    const SampleEnsemble coarse = e.coarsen(2);
    EXPECT_EQ(coarse.steps(), 2);
    EXPECT_DOUBLE_EQ(coarse.path(1).at(1, 0), e.path(1).at(2, 0));
}

TEST(LatticeSampling, FrequenciesMatchProbabilities) {
    const LatticeModel model = LatticeModel::binary_walk(1, 1.0, 0.3);
    const SampleEnsemble e = sample_lattice(model, 100000, 4);
    double up = 0.0;
    for (const auto& x : e.paths()) up += x.at(1, 0) > 0 ? 1.0 : 0.0;
    up /= 100000;
    EXPECT_NEAR(up, 0.3, 4.0 * std::sqrt(0.21 / 100000));
}

TEST(PairwiseSum, MatchesLongDouble) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(100001);
    long double ref = 0.0L;
    for (double& x : v) {
        x = u(rng);
        ref += x;
    }
    EXPECT_NEAR(pairwise_sum(v), static_cast<double>(ref), 1e-11);
}
