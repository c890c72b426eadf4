#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adsens/continuous.hpp"
#include "adsens/error.hpp"
#include "adsens/payoffs.hpp"

using namespace adsens;

namespace {

ContinuousOptions quick() {
    ContinuousOptions o;
    o.bootstrap_resamples = 20;
    o.refinement_check = false;
    return o;
}

Payoff constant_payoff() {
    Payoff f;
    f.name = "constant";
    f.evaluate = [](const DiscretePath&, const TimeGrid&) { return -2.0; };
    return f;
}

}  // namespace

TEST(Hyperbolic, MertonSmallEnsemble) {
    const double lambda = 0.5, horizon = 2.0;
    const SampleEnsemble ens = sample_brownian(horizon, 16, 1, 2000, 1);
    const Payoff f = payoffs::merton(lambda, 0.03, 1.5, horizon);
    const CostSpec spec(2.0, Scaling::hyperbolic, horizon);
    const SensitivityReport r = upsilon_hyperbolic(ens, f, spec, Penalty::indicator(1.0), quick());
    // D_t f = lambda for every path: the estimator is exact up to roundoff
    EXPECT_NEAR(r.upsilon, closed_form_reference(ClosedForm::merton, lambda, horizon), 1e-8);
    const SensitivityReport wide =
        upsilon_hyperbolic(ens, f, spec, Penalty::indicator(std::sqrt(horizon)), quick());
    EXPECT_NEAR(wide.upsilon, lambda * horizon, 1e-8);
}

TEST(Hyperbolic, LinearPayoffGeneralP) {
    const double horizon = 1.5;
    const std::vector<double> a{0.4, -1.2};
    const SampleEnsemble ens = sample_brownian(horizon, 8, 2, 1000, 2);
    for (double p : {1.5, 2.0, 3.0}) {
        const CostSpec spec(p, Scaling::hyperbolic, horizon);
        const SensitivityReport r = upsilon_hyperbolic(ens, payoffs::linear(a), spec, Penalty::indicator(1.0), quick());
        EXPECT_NEAR(r.upsilon, std::pow(horizon, 1.0 / spec.q()) * lp_norm(a, spec.q()), 1e-8) << "p=" << p;
    }
}

TEST(Hyperbolic, ConstantPayoffAndParabolicCostRejected) {
    const SampleEnsemble ens = sample_brownian(1.0, 8, 1, 500, 3);
    EXPECT_EQ(upsilon_hyperbolic(ens, constant_payoff(), CostSpec(2.0, Scaling::hyperbolic, 1.0),
                                 Penalty::indicator(1.0), quick())
                  .upsilon,
              0.0);
    EXPECT_THROW(upsilon_hyperbolic(ens, constant_payoff(), CostSpec(2.0, Scaling::parabolic, 1.0),
                                    Penalty::indicator(1.0), quick()),
                 ValidationError);
}

TEST(Hyperbolic, GridDoublingIsStable) {
    // log-contract style payoff with state dependence: 0.5 H^2, H = int tanh-sigma dX
    const Payoff f = payoffs::log_contract(SigmaSpec::tanh(0.3, 0.1));
    const CostSpec spec(2.0, Scaling::hyperbolic, 1.0);
    ContinuousOptions o = quick();
    o.refinement_check = true;
    const SensitivityReport r = upsilon_hyperbolic(sample_brownian(1.0, 32, 1, 20000, 4), f, spec,
                                                   Penalty::indicator(1.0), o);
    ASSERT_TRUE(std::isfinite(r.diagnostics.coarse_upsilon));
    const double gap = std::abs(r.upsilon - r.diagnostics.coarse_upsilon) / r.upsilon;
    EXPECT_LT(gap, 0.01 + 3.0 * r.diagnostics.r_norm_se / r.upsilon) << r.upsilon << " vs " << r.diagnostics.coarse_upsilon;
}

TEST(Parabolic, LinearUtilityGivesZeroField) {
    const SampleEnsemble ens = sample_brownian(1.0, 16, 1, 1000, 5);
    const ParabolicField phi = phi_parabolic(ens, SigmaSpec::constant(0.3), UtilitySpec::linear(2.0));
    for (double v : phi.raw.data()) EXPECT_EQ(v, 0.0);
    for (double v : phi.phi.data()) EXPECT_NEAR(v, 0.0, 1e-14);
    EXPECT_NEAR(upsilon_mart_parabolic(ens, SigmaSpec::constant(0.3), UtilitySpec::linear(2.0),
                                       Penalty::indicator(1.0), quick())
                    .upsilon,
                0.0, 1e-12);
}

TEST(Parabolic, QuadraticUtilityConstantSigma) {
    const double c = 0.7;
    const SampleEnsemble ens = sample_brownian(1.0, 16, 1, 1000, 6);
    const ParabolicField phi = phi_parabolic(ens, SigmaSpec::constant(c), UtilitySpec::quadratic());
    for (double v : phi.raw.data()) EXPECT_NEAR(v, c * c, 1e-14);
    for (double v : phi.phi.data()) EXPECT_NEAR(v, c * c, 1e-12);
}

TEST(Parabolic, ClosedForms) {
    for (double horizon : {1.0, 4.0}) {
        const SampleEnsemble ens = sample_brownian(horizon, 16, 1, 1000, 7);
        const SensitivityReport quad = upsilon_mart_parabolic(ens, SigmaSpec::constant(1.0), UtilitySpec::quadratic(),
                                                              Penalty::indicator(1.0), quick());
        EXPECT_NEAR(quad.upsilon, closed_form_reference(ClosedForm::quadvar, 0.0, horizon), 1e-10);
        const double sigma = 0.2;
        const SensitivityReport log = upsilon_mart_parabolic(ens, SigmaSpec::constant(sigma), UtilitySpec::quadratic(),
                                                             Penalty::indicator(1.0), quick());
        EXPECT_NEAR(log.upsilon, closed_form_reference(ClosedForm::logcontract, sigma, horizon), 1e-10);
        // indicator(sqrt(T) / sigma): L*(r) = rho r = sigma T
        const SensitivityReport wide =
            upsilon_mart_parabolic(ens, SigmaSpec::constant(sigma), UtilitySpec::quadratic(),
                                   Penalty::indicator(std::sqrt(horizon) / sigma), quick());
        EXPECT_NEAR(wide.upsilon, sigma * horizon, 1e-10);
    }
}

TEST(Parabolic, UtilityScaling) {
    const SampleEnsemble ens = sample_brownian(1.0, 16, 1, 2000, 8);
    const SigmaSpec sigma = SigmaSpec::tanh(0.2, 0.05);
    const SensitivityReport one =
        upsilon_mart_parabolic(ens, sigma, UtilitySpec::quadratic(1.0), Penalty::indicator(1.0), quick());
    const SensitivityReport three =
        upsilon_mart_parabolic(ens, sigma, UtilitySpec::quadratic(3.0), Penalty::indicator(1.0), quick());
    EXPECT_NEAR(three.r_norm, 3.0 * one.r_norm, 1e-10 * three.r_norm);
    EXPECT_NEAR(three.upsilon, 3.0 * one.upsilon, 1e-10 * three.upsilon);
}

TEST(Parabolic, GridDoublingConstantSigma) {
    const SensitivityReport coarse = upsilon_mart_parabolic(sample_brownian(1.0, 16, 1, 2000, 9), SigmaSpec::constant(0.2),
                                                            UtilitySpec::quadratic(), Penalty::indicator(1.0), quick());
    const SensitivityReport fine = upsilon_mart_parabolic(sample_brownian(1.0, 32, 1, 2000, 9), SigmaSpec::constant(0.2),
                                                          UtilitySpec::quadratic(), Penalty::indicator(1.0), quick());
    EXPECT_LT(std::abs(fine.upsilon - coarse.upsilon) / fine.upsilon, 0.01);
}

TEST(Parabolic, RejectsMultidimensional) {
    const SampleEnsemble ens = sample_brownian(1.0, 4, 2, 500, 1);
    EXPECT_THROW(phi_parabolic(ens, SigmaSpec::constant(1.0), UtilitySpec::quadratic()), ValidationError);
}

TEST(SigmaAndUtility, PartialsMatchFiniteDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double h = 1e-4;
    for (const SigmaSpec& s : {SigmaSpec::constant(0.3), SigmaSpec::tanh(0.2, 0.05), SigmaSpec::tanh(-0.1, 1.3)}) {
        for (int k = 0; k < 50; ++k) {
            const double t = std::abs(u(rng)), x = u(rng);
            EXPECT_NEAR(s.dx(t, x), (s.value(t, x + h) - s.value(t, x - h)) / (2 * h), 1e-6) << s.name;
            EXPECT_NEAR(s.dxx(t, x), (s.dx(t, x + h) - s.dx(t, x - h)) / (2 * h), 1e-6) << s.name;
        }
    }
    for (const UtilitySpec& w : {UtilitySpec::linear(2.0), UtilitySpec::quadratic(0.5), UtilitySpec::logcosh()}) {
        for (int k = 0; k < 50; ++k) {
            const double x = u(rng);
            EXPECT_NEAR(w.d1(x), (w.value(x + h) - w.value(x - h)) / (2 * h), 1e-6) << w.name;
            EXPECT_NEAR(w.d2(x), (w.d1(x + h) - w.d1(x - h)) / (2 * h), 1e-6) << w.name;
        }
    }
    EXPECT_EQ(SigmaSpec::parse("tanh:a=0.2,b=0.05").name, SigmaSpec::tanh(0.2, 0.05).name);
    EXPECT_THROW(SigmaSpec::parse("cosh:1"), ValidationError);
    EXPECT_THROW(UtilitySpec::parse("exp"), ValidationError);
}

TEST(Parabolic, TanhSigmaAgainstDiscreteSurrogate) {
    // report only: the formula-based integrand against the discrete martingale sensitivity
    // of U(H) on the same grid with the regression projection
    const SampleEnsemble ens = sample_brownian(1.0, 16, 1, 20000, 10);
    const SigmaSpec sigma = SigmaSpec::tanh(0.2, 0.05);
    const SensitivityReport formula =
        upsilon_mart_parabolic(ens, sigma, UtilitySpec::quadratic(), Penalty::indicator(1.0), quick());
    const ReferenceModel mc = ReferenceModel::monte_carlo(ens, BasisSpec::parse("poly:3:state,prev"));
    SensitivityOptions so;
    so.bootstrap_resamples = 20;
    const SensitivityReport discrete =
        upsilon_mart(mc, payoffs::ito_utility(sigma, UtilitySpec::quadratic()), CostSpec(2.0), Penalty::indicator(1.0), so);
    RecordProperty("formula", std::to_string(formula.upsilon));
    RecordProperty("discrete_surrogate", std::to_string(discrete.upsilon));
    std::printf("tanh sigma: formula %.6g, discrete surrogate %.6g\n", formula.upsilon, discrete.upsilon);
    EXPECT_TRUE(std::isfinite(formula.upsilon));
    EXPECT_TRUE(std::isfinite(discrete.upsilon));
}
