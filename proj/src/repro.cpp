#include "adsens/repro.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "adsens/continuous.hpp"
#include "adsens/error.hpp"
#include "adsens/payoffs.hpp"
#include "adsens/sensitivity.hpp"

namespace adsens {

namespace {

double path_average(const DiscretePath& x) {
    double s = 0.0;
    for (int n = 0; n <= x.steps(); ++n) s += x.at(n, 0);
    return s / static_cast<double>(x.steps() + 1);
}

ReproResult finish(std::string target, const SensitivityReport& report, double closed_form, double tolerance) {
    ReproResult out;
    out.target = std::move(target);
    out.computed = report.upsilon;
    out.closed_form = closed_form;
    out.rel_error = std::abs(out.computed - closed_form) / std::abs(closed_form);
    out.tolerance = tolerance;
    out.standard_error = report.diagnostics.r_norm_se;
    out.pass = out.rel_error <= tolerance;
    return out;
}

}  // namespace

std::vector<double> asian_strike_grid(const PathEnumeration& enumeration, int count) {
    if (count < 2) throw ValidationError("strike grid needs at least two strikes");
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& x : enumeration.paths) {
        const double a = path_average(x);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    const double h = (hi - lo) / (count - 1);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
    return out;
}

std::vector<AsianFigureRow> asian_figure(int steps, int strikes) {
    const LatticeModel walk = LatticeModel::binary_walk(steps);
    const ReferenceModel ref = ReferenceModel::exact(walk);
    const PathEnumeration& paths = ref.exact_projector()->enumeration();
    const CostSpec spec(2.0);
    const Penalty penalty = Penalty::indicator(1.0);
    std::vector<AsianFigureRow> rows;
    for (double k : asian_strike_grid(paths, strikes)) {
        AsianFigureRow row;
        row.strike = k;
        row.upsilon_mart = upsilon_mart(ref, payoffs::asian(k), spec, penalty).upsilon;
        std::vector<double> terms;
        for (std::size_t m = 0; m < paths.paths.size(); ++m) {
            const double a = path_average(paths.paths[m]);
            if (a >= k) terms.push_back(paths.probabilities[m] * a);
        }
        row.parametric_jump_derivative = pairwise_sum(terms);
        row.parametric = row.parametric_jump_derivative / std::sqrt(static_cast<double>(steps));
        rows.push_back(row);
    }
    return rows;
}

void write_asian_csv(std::ostream& out, const std::vector<AsianFigureRow>& rows) {
    out << "K,upsilon_mart,parametric,parametric_jump_derivative\n";
    for (const auto& r : rows) {
        out << format_sig(r.strike) << ',' << format_sig(r.upsilon_mart) << ',' << format_sig(r.parametric) << ','
            << format_sig(r.parametric_jump_derivative) << '\n';
    }
}

ReproResult repro_merton(double lambda, const ReproSetup& setup) {
    const SampleEnsemble ensemble = sample_brownian(setup.horizon, setup.steps, 1, setup.paths, setup.seed);
    ContinuousOptions options;
    options.bootstrap_resamples = setup.bootstrap_resamples;
    options.refinement_check = false;
    const SensitivityReport report =
        upsilon_hyperbolic(ensemble, payoffs::merton(lambda, 0.0, 1.0, setup.horizon),
                           CostSpec(2.0, Scaling::hyperbolic, setup.horizon), Penalty::indicator(1.0), options);
    return finish("merton", report, closed_form_reference(ClosedForm::merton, lambda, setup.horizon), 0.01);
}

ReproResult repro_logcontract(double sigma, const ReproSetup& setup) {
    const SampleEnsemble ensemble = sample_brownian(setup.horizon, setup.steps, 1, setup.paths, setup.seed);
    ContinuousOptions options;
    options.bootstrap_resamples = setup.bootstrap_resamples;
    const SensitivityReport report = upsilon_mart_parabolic(ensemble, SigmaSpec::constant(sigma),
                                                            UtilitySpec::quadratic(), Penalty::indicator(1.0), options);
    return finish("logcontract", report, closed_form_reference(ClosedForm::logcontract, sigma, setup.horizon), 0.02);
}

ReproResult repro_quadvar(const ReproSetup& setup) {
    const SampleEnsemble ensemble = sample_brownian(setup.horizon, setup.steps, 1, setup.paths, setup.seed);
    ContinuousOptions options;
    options.bootstrap_resamples = setup.bootstrap_resamples;
    const SensitivityReport report = upsilon_mart_parabolic(ensemble, SigmaSpec::constant(1.0),
                                                            UtilitySpec::quadratic(), Penalty::indicator(1.0), options);
    return finish("quadvar", report, closed_form_reference(ClosedForm::quadvar, 0.0, setup.horizon), 0.01);
}

}  // namespace adsens
