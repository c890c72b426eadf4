#pragma once

// Brute-force check of V(delta) = V(0) + Upsilon delta + o(delta) on small lattices by direct
// maximization over adapted Monge perturbations Y = X + Delta^{-1} phi.

#include <cstdint>
#include <string>
#include <vector>

#include "adsens/lattice.hpp"
#include "adsens/malliavin.hpp"
#include "adsens/penalty.hpp"
#include "adsens/sensitivity.hpp"

namespace adsens {

struct OracleOptions {
    int random_starts = 8;
    int max_iterations = 2000;
    std::uint64_t seed = 7;
    MalliavinBackend malliavin{};
    /// Start one ascent from the first-order adversarial map.
    bool warm_start = true;
    /// Largest lattice the oracle accepts.
    std::size_t max_nodes = 1000;
};

struct OracleResult {
    /// Best objective E f(Y) - delta L(E[c]^{1/p} / delta) found.
    double value = 0.0;
    /// E_mu f = V(0).
    double base_value = 0.0;
    double gain = 0.0;
    double cost = 0.0;
    /// phi per node, row-major (node id, component); the root row is zero.
    std::vector<double> field;
    int iterations = 0;
    std::string best_start;
};

/// A lower bound on V(delta) by projected gradient ascent with Armijo backtracking and
/// multistarts. Indicator penalties project onto the cost ball by rescaling; constrained mode
/// also removes the conditional mean of phi over every sibling group.
OracleResult brute_force_value(const LatticeModel& model, const Payoff& f, const CostSpec& spec,
                               const Penalty& penalty, double delta, bool constrained,
                               const OracleOptions& options = {});

struct SlopePoint {
    double delta = 0.0;
    double value = 0.0;
    /// value - V(0)
    double increment = 0.0;
};

struct SlopeCheck {
    double slope = 0.0;
    double curvature = 0.0;
    /// Upsilon (or Upsilon_Mart when constrained)
    double reference = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    bool pass = false;
    bool monotone = true;
    double base_value = 0.0;
    std::vector<SlopePoint> ladder;
};

/// Fits V(delta) - V(0) ~ s delta + c delta^2 by least squares over the ladder and compares s
/// with the sensitivity: PASS if |s - Upsilon| <= max(0.05 Upsilon, 1e-6).
SlopeCheck slope_check(const LatticeModel& model, const Payoff& f, const CostSpec& spec, const Penalty& penalty,
                       const std::vector<double>& deltas, bool constrained, const OracleOptions& options = {});

struct CostAudit {
    bool pass = false;
    double cost = 0.0;
    double bound = 0.0;
};

/// Recomputes E[c_N(X, Y)] of an adversarial coupling and checks it against u^p delta^p (1 + 1e-9).
CostAudit coupling_cost_audit(const AdversarialResult& result, double delta, const CostSpec& spec,
                              const Penalty& penalty);

}  // namespace adsens
