#include "adsens/continuous.hpp"

#include <cmath>

#include "adsens/error.hpp"

namespace adsens {

namespace {

std::vector<double> grid_steps(const TimeGrid& grid) {
    std::vector<double> dt(static_cast<std::size_t>(grid.steps()));
    for (int n = 1; n <= grid.steps(); ++n) dt[static_cast<std::size_t>(n - 1)] = grid.dt(n);
    return dt;
}

SensitivityReport hyperbolic_once(const SampleEnsemble& ensemble, const Payoff& f, const CostSpec& spec,
                                  const Penalty& penalty, const ContinuousOptions& options, bool with_bootstrap) {
    PathField gradient(ensemble.size(), ensemble.steps(), ensemble.dim());
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
        gradient.set_path(m, grid_malliavin_ct(f, ensemble.path(m), ensemble.grid(), options.malliavin));
    }
    const RegressionProjector projector(ensemble, options.basis);
    const PathField optional = projector.optional(gradient);
    SensitivityOptions so;
    so.bootstrap_resamples = with_bootstrap ? options.bootstrap_resamples : 0;
    so.bootstrap_seed = options.bootstrap_seed;
    const std::vector<double> weights(ensemble.size(), ensemble.weight());
    SensitivityReport report = assemble_report("upsilon_hyperbolic", optional, weights, grid_steps(ensemble.grid()),
                                               spec, penalty, true, so);
    report.diagnostics.backend = "monte-carlo(M=" + std::to_string(ensemble.size()) + ", " + projector.describe() + ")";
    return report;
}

}  // namespace

SensitivityReport upsilon_hyperbolic(const SampleEnsemble& ensemble, const Payoff& f, const CostSpec& spec,
                                     const Penalty& penalty, const ContinuousOptions& options) {
    if (spec.scaling() == Scaling::parabolic) throw ValidationError("hyperbolic estimator needs a non-parabolic cost");
    SensitivityReport report = hyperbolic_once(ensemble, f, spec, penalty, options, true);
    using Kind = MalliavinBackend::Kind;
    const bool analytic =
        options.malliavin.kind == Kind::analytic || (options.malliavin.kind == Kind::automatic && f.has_gradient());
    report.diagnostics.malliavin = analytic ? "analytic" : "bump";
    const GrowthCheck growth = validate_growth(penalty, spec.p());
    report.diagnostics.growth_ok = growth.ok;
    report.diagnostics.growth_details = growth.details;
    if (!growth.ok) report.diagnostics.notes.push_back("growth warning: " + growth.details);
    if (options.refinement_check && ensemble.steps() % 2 == 0 && ensemble.steps() >= 2) {
        const SensitivityReport coarse = hyperbolic_once(ensemble.coarsen(2), f, spec, penalty, options, false);
        report.diagnostics.coarse_upsilon = coarse.upsilon;
        report.diagnostics.notes.push_back("grid refinement: upsilon(N/2) - upsilon(N) = " +
                                           format_sig(coarse.upsilon - report.upsilon));
    }
    return report;
}

ParabolicField phi_parabolic(const SampleEnsemble& ensemble, const SigmaSpec& sigma, const UtilitySpec& utility,
                             const BasisSpec& basis) {
    if (ensemble.dim() != 1) throw ValidationError("parabolic estimator supports d = 1 only");
    const int steps = ensemble.steps();
    const TimeGrid& grid = ensemble.grid();
    ParabolicField out;
    out.raw = PathField(ensemble.size(), steps, 1);
    std::vector<double> tail_dx(static_cast<std::size_t>(steps) + 1), tail_dxx(static_cast<std::size_t>(steps) + 1);
    for (std::size_t m = 0; m < ensemble.size(); ++m) {
        const DiscretePath& x = ensemble.path(m);
        // backward partial sums of the left-point integrals from t_j to T
        tail_dx[static_cast<std::size_t>(steps)] = 0.0;
        tail_dxx[static_cast<std::size_t>(steps)] = 0.0;
        double h = 0.0;
        for (int j = steps - 1; j >= 0; --j) {
            const double t = grid[j], xj = x.at(j, 0), dx = x.at(j + 1, 0) - xj;
            tail_dx[static_cast<std::size_t>(j)] = tail_dx[static_cast<std::size_t>(j) + 1] + sigma.dx(t, xj) * dx;
            tail_dxx[static_cast<std::size_t>(j)] = tail_dxx[static_cast<std::size_t>(j) + 1] + sigma.dxx(t, xj) * dx;
            h += sigma.value(t, xj) * dx;
        }
        const double u1 = utility.d1(h), u2 = utility.d2(h);
        for (int k = 1; k <= steps; ++k) {
            const int j = k - 1;
            const double ds_h = sigma.value(grid[j], x.at(j, 0)) + tail_dx[static_cast<std::size_t>(j)];
            const double v = u2 * ds_h * ds_h + u1 * tail_dxx[static_cast<std::size_t>(j)];
            if (!std::isfinite(v)) throw NumericalError("non-finite parabolic integrand (check sigma partials)");
            out.raw.at(m, k, 0) = v;
        }
    }
    out.phi = RegressionProjector(ensemble, basis).predictable(out.raw);
    return out;
}

SensitivityReport upsilon_mart_parabolic(const SampleEnsemble& ensemble, const SigmaSpec& sigma,
                                         const UtilitySpec& utility, const Penalty& penalty,
                                         const ContinuousOptions& options) {
    const ParabolicField field = phi_parabolic(ensemble, sigma, utility, options.basis);
    SensitivityOptions so;
    so.bootstrap_resamples = options.bootstrap_resamples;
    so.bootstrap_seed = options.bootstrap_seed;
    const std::vector<double> weights(ensemble.size(), ensemble.weight());
    const CostSpec spec(2.0, Scaling::parabolic, ensemble.grid().horizon());
    SensitivityReport report = assemble_report("upsilon_mart_parabolic", field.phi, weights,
                                               grid_steps(ensemble.grid()), spec, penalty, true, so);
    report.diagnostics.backend =
        "monte-carlo(M=" + std::to_string(ensemble.size()) + ", regression(" + options.basis.describe() + "))";
    report.diagnostics.malliavin = "analytic(sigma=" + sigma.name + ", U=" + utility.name + ")";
    const GrowthCheck growth = validate_growth(penalty, 2.0);
    report.diagnostics.growth_ok = growth.ok;
    report.diagnostics.growth_details = growth.details;
    if (!growth.ok) report.diagnostics.notes.push_back("growth warning: " + growth.details);
    return report;
}

double closed_form_reference(ClosedForm which, double parameter, double horizon) {
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    switch (which) {
        case ClosedForm::merton: return parameter * std::sqrt(horizon);
        case ClosedForm::logcontract: return parameter * parameter * std::sqrt(horizon);
        case ClosedForm::quadvar: return std::sqrt(horizon);
    }
    return 0.0;
}

}  // namespace adsens
