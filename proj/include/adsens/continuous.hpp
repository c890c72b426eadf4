#pragma once

// Continuous-time sensitivities on a time grid: hyperbolic scaling (drift uncertainty) and
// parabolic scaling (volatility uncertainty, martingale constraint).

#include "adsens/ensemble.hpp"
#include "adsens/malliavin.hpp"
#include "adsens/penalty.hpp"
#include "adsens/projection.hpp"
#include "adsens/sensitivity.hpp"
#include "adsens/sigma.hpp"

namespace adsens {

struct ContinuousOptions {
    BasisSpec basis{};
    MalliavinBackend malliavin{};
    int bootstrap_resamples = 200;
    std::uint64_t bootstrap_seed = 1;
    /// Recompute on the grid coarsened by 2 and report it (N must be even).
    bool refinement_check = true;
};

/// Upsilon = L*((int_0^T E|o D_t f|_q^q dt)^{1/q}) with D_t f from grid bumps and the optional
/// projection by regression.
SensitivityReport upsilon_hyperbolic(const SampleEnsemble& ensemble, const Payoff& f, const CostSpec& spec,
                                     const Penalty& penalty, const ContinuousOptions& options = {});

struct ParabolicField {
    /// U''(H)(D_s H)^2 + U'(H) sum_{j >= k-1} d2sigma(t_j, X_j) dX_{j+1}, row k <-> s = t_{k-1}.
    PathField raw;
    /// Predictable projection of raw given the path up to t_{k-1}.
    PathField phi;
};

/// The parabolic-scaling integrand phi_s for f = U(H), H = sum_k sigma(t_k, X_k) dX_{k+1}
/// (d = 1, left-point sums).
ParabolicField phi_parabolic(const SampleEnsemble& ensemble, const SigmaSpec& sigma, const UtilitySpec& utility,
                             const BasisSpec& basis = {});

/// Upsilon_Mart = L*((E sum_k dt_k phi_{t_k}^2)^{1/2}).
SensitivityReport upsilon_mart_parabolic(const SampleEnsemble& ensemble, const SigmaSpec& sigma,
                                         const UtilitySpec& utility, const Penalty& penalty,
                                         const ContinuousOptions& options = {});

enum class ClosedForm { merton, logcontract, quadvar };

/// lambda sqrt(T), sigma^2 sqrt(T) and sqrt(T) under the indicator(1) penalty; `parameter` is
/// lambda or sigma (ignored for quadvar).
double closed_form_reference(ClosedForm which, double parameter, double horizon);

}  // namespace adsens
