#include <gtest/gtest.h>

#include <cmath>

#include "adsens/error.hpp"
#include "adsens/oracle.hpp"
#include "adsens/payoffs.hpp"

using namespace adsens;

namespace {

const std::vector<double> kLadder{0.1, 0.05, 0.025, 0.0125};

double base_value(const LatticeModel& model, const Payoff& f) {
    const PathEnumeration e = enumerate_paths(model);
    double s = 0.0;
    for (std::size_t m = 0; m < e.paths.size(); ++m) s += e.probabilities[m] * f(e.paths[m], TimeGrid::integer(model.steps()));
    return s;
}

}  // namespace

TEST(Oracle, LinearPayoffGainIsExact) {
    const LatticeModel walk = LatticeModel::binary_walk(3);
    const Payoff f = payoffs::linear({1.5});
    for (double delta : {0.2, 0.05}) {
        const OracleResult r = brute_force_value(walk, f, CostSpec(2.0), Penalty::indicator(1.0), delta, false);
        EXPECT_NEAR(r.value - r.base_value, delta * std::sqrt(3.0) * 1.5, 1e-9);
    }
}

TEST(Oracle, ZeroBudgetIsBaseValue) {
    const LatticeModel walk = LatticeModel::binary_walk(3);
    const Payoff f = payoffs::asian(0.25);
    const OracleResult r = brute_force_value(walk, f, CostSpec(2.0), Penalty::indicator(1.0), 0.0, false);
    EXPECT_EQ(r.value, r.base_value);
    EXPECT_NEAR(r.base_value, base_value(walk, f), 1e-15);
}

TEST(Oracle, ConstrainedLinearCannotGain) {
    const LatticeModel walk = LatticeModel::iid_walk(3, {-1.0, 2.0}, {2.0 / 3.0, 1.0 / 3.0});
    const OracleResult r =
        brute_force_value(walk, payoffs::linear({2.0}), CostSpec(2.0), Penalty::indicator(1.0), 0.1, true);
    EXPECT_NEAR(r.value, r.base_value, 1e-12);
}

TEST(Oracle, LowerBoundOfFirstOrderMap) {
    // the adversarial coupling is feasible, so the oracle must do at least as well
    const LatticeModel walk = LatticeModel::binary_walk(4);
    const Payoff f = payoffs::asian_squared();
    for (bool constrained : {false, true}) {
        const double delta = 0.1;
        const AdversarialResult adv = adversarial_map(ReferenceModel::exact(walk), f, CostSpec(2.0),
                                                      Penalty::indicator(1.0), delta, constrained);
        const OracleResult r = brute_force_value(walk, f, CostSpec(2.0), Penalty::indicator(1.0), delta, constrained);
        EXPECT_GE(r.value - r.base_value, adv.penalized_gain - 1e-12);
        EXPECT_LE(r.cost, delta * delta * (1 + 1e-9));
    }
}

TEST(Oracle, MonotoneInBudget) {
    const LatticeModel walk = LatticeModel::binary_walk(3);
    const SlopeCheck s = slope_check(walk, payoffs::asian(0.25), CostSpec(2.0), Penalty::indicator(1.0), kLadder, false);
    EXPECT_TRUE(s.monotone);
}

TEST(Oracle, PenalizedObjectiveWithPowerPenalty) {
    const LatticeModel walk = LatticeModel::binary_walk(2);
    const Payoff f = payoffs::linear({1.0});
    // sup_u u r delta - delta L(u) = delta L*(r) for linear payoffs with r = sqrt(2)
    const Penalty l = Penalty::power(3.0);
    const OracleResult r = brute_force_value(walk, f, CostSpec(2.0), l, 0.1, false);
    EXPECT_NEAR(r.value - r.base_value, 0.1 * l.conjugate(std::sqrt(2.0)), 1e-8);
}

TEST(Oracle, SizeGuard) {
    EXPECT_THROW(brute_force_value(LatticeModel::binary_walk(10), payoffs::linear({1.0}), CostSpec(2.0),
                                   Penalty::indicator(1.0), 0.1, false),
                 ValidationError);
}

TEST(CostAudit, PassAndFail) {
    const ReferenceModel walk = ReferenceModel::exact(LatticeModel::binary_walk(4));
    const double delta = 0.2;
    AdversarialResult adv =
        adversarial_map(walk, payoffs::asian_squared(), CostSpec(3.0), Penalty::indicator(1.0), delta, false);
    EXPECT_TRUE(coupling_cost_audit(adv, delta, CostSpec(3.0), Penalty::indicator(1.0)).pass);

    AdversarialResult zero = adv;
    zero.perturbed = zero.original;
    const CostAudit z = coupling_cost_audit(zero, delta, CostSpec(3.0), Penalty::indicator(1.0));
    EXPECT_TRUE(z.pass);
    EXPECT_EQ(z.cost, 0.0);

    for (auto& y : adv.perturbed) {
        for (int n = 1; n <= y.steps(); ++n) y.at(n, 0) *= 1.5;
    }
    EXPECT_FALSE(coupling_cost_audit(adv, delta, CostSpec(3.0), Penalty::indicator(1.0)).pass);
}

TEST(SlopeCheck, LinearMatchesExactly) {
    const SlopeCheck s = slope_check(LatticeModel::binary_walk(3), payoffs::linear({-0.8}), CostSpec(2.0),
                                     Penalty::indicator(1.0), kLadder, false);
    EXPECT_NEAR(s.slope, s.reference, 1e-9);
    EXPECT_NEAR(s.curvature, 0.0, 1e-7);
    EXPECT_TRUE(s.pass);
}

TEST(SlopeCheck, CubicUnconstrained) {
    const SlopeCheck s = slope_check(LatticeModel::binary_walk(2), payoffs::cubic(1.0, 0.1), CostSpec(2.0),
                                     Penalty::indicator(1.0), kLadder, false);
    EXPECT_TRUE(s.pass) << "slope " << s.slope << " reference " << s.reference;
    EXPECT_TRUE(s.monotone);
}

TEST(SlopeCheck, AsianConstrained) {
    const SlopeCheck s = slope_check(LatticeModel::binary_walk(3), payoffs::asian(0.25), CostSpec(2.0),
                                     Penalty::indicator(1.0), kLadder, true);
    EXPECT_TRUE(s.pass) << "slope " << s.slope << " reference " << s.reference;
}

TEST(SlopeCheck, GeneralExponent) {
    const SlopeCheck s = slope_check(LatticeModel::binary_walk(2), payoffs::cubic(1.0, 0.1), CostSpec(3.0),
                                     Penalty::indicator(1.0), kLadder, false);
    EXPECT_TRUE(s.pass) << "slope " << s.slope << " reference " << s.reference;
}
