#include "adsens/sensitivity.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "adsens/error.hpp"

namespace adsens {

// ---------------------------------------------------------------------------
// reference model

ReferenceModel ReferenceModel::exact(const LatticeModel& model) {
    ReferenceModel ref;
    ref.lattice_ = std::make_shared<const LatticeModel>(model);
    auto projector = std::make_shared<const ExactProjector>(enumerate_paths(model));
    ref.paths_ = &projector->enumeration().paths;
    ref.weights_ = projector->enumeration().probabilities;
    ref.projector_ = std::move(projector);
    ref.grid_ = TimeGrid::integer(model.steps());
    ref.martingale_ = model.is_martingale();
    return ref;
}

ReferenceModel ReferenceModel::monte_carlo(SampleEnsemble ensemble, BasisSpec basis, bool martingale,
                                           bool cross_fit) {
    ReferenceModel ref;
    ref.ensemble_ = std::make_shared<const SampleEnsemble>(std::move(ensemble));
    ref.projector_ = std::make_shared<const RegressionProjector>(*ref.ensemble_, basis, 1e-8, cross_fit);
    ref.paths_ = &ref.ensemble_->paths();
    ref.weights_.assign(ref.ensemble_->size(), ref.ensemble_->weight());
    ref.grid_ = ref.ensemble_->grid();
    ref.martingale_ = martingale;
    return ref;
}

const ExactProjector* ReferenceModel::exact_projector() const {
    return dynamic_cast<const ExactProjector*>(projector_.get());
}

std::string ReferenceModel::describe() const {
    if (is_exact()) return "exact(" + std::to_string(size()) + " paths)";
    return "monte-carlo(M=" + std::to_string(size()) + ", " + projector_->describe() + ")";
}

// ---------------------------------------------------------------------------

std::vector<double> v_map(std::span<const double> e, double q) {
    if (!(q > 1.0)) throw ValidationError("v_map needs q > 1");
    std::vector<double> out(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        out[i] = e[i] == 0.0 ? 0.0 : e[i] * std::pow(std::abs(e[i]), q - 2.0);
    }
    return out;
}

PathField malliavin_field(const ReferenceModel& model, const Payoff& f, const MalliavinBackend& backend) {
    PathField out(model.size(), model.steps(), model.dim());
    for (std::size_t m = 0; m < model.size(); ++m) {
        out.set_path(m, discrete_malliavin(f, model.path(m), model.grid(), backend));
    }
    return out;
}

namespace {

std::string describe_backend(const Payoff& f, const MalliavinBackend& b) {
    using Kind = MalliavinBackend::Kind;
    if (b.kind == Kind::analytic || (b.kind == Kind::automatic && f.has_gradient())) return "analytic";
    std::string out = "bump";
    if (b.epsilon > 0.0) out += "(eps=" + format_sig(b.epsilon) + ")";
    if (b.richardson) out += "+richardson";
    return out;
}

/// Weight of E|z_n|^q in r^q so that L*(r) accounts for the cost scaling: (T/N) under
/// hyperbolic scaling, 1 otherwise.
std::vector<double> discrete_time_weights(const CostSpec& spec, int steps) {
    const double w = spec.scaling() == Scaling::hyperbolic ? spec.horizon() / steps : 1.0;
    return std::vector<double>(static_cast<std::size_t>(steps), w);
}

void fill_common(SensitivityReport& report, const ReferenceModel& model, const Payoff& f, const CostSpec& spec,
                 const Penalty& penalty, const SensitivityOptions& options) {
    report.diagnostics.backend = model.describe();
    report.diagnostics.malliavin = describe_backend(f, options.malliavin);
    const GrowthCheck growth = validate_growth(penalty, spec.p());
    report.diagnostics.growth_ok = growth.ok;
    report.diagnostics.growth_details = growth.details;
    if (!growth.ok) report.diagnostics.notes.push_back("growth warning: " + growth.details);
    if (f.at_kink) {
        std::vector<double> mass;
        for (std::size_t m = 0; m < model.size(); ++m) {
            if (f.at_kink(model.path(m), model.grid())) mass.push_back(model.weights()[m]);
        }
        report.diagnostics.kink_mass = pairwise_sum(mass);
        if (report.diagnostics.kink_mass > 0.0) {
            report.diagnostics.notes.push_back("payoff kink carries mass " + format_sig(report.diagnostics.kink_mass) +
                                               "; the one-sided derivative convention is used there");
        }
    }
}

PathField subtract(const PathField& a, const PathField& b) {
    PathField out = a;
    for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] -= b.data()[k];
    return out;
}

void require_martingale(const ReferenceModel& model) {
    if (model.is_exact()) {
        const MartingaleCheck check = check_martingale(*model.lattice(), 1e-10);
        if (!check.ok) {
            throw ValidationError("reference lattice is not a martingale (worst drift " +
                                  format_sig(check.worst_violation) + ")");
        }
    } else if (!model.claims_martingale()) {
        throw ValidationError("martingale sensitivity needs a martingale reference ensemble");
    }
}

struct Residual {
    PathField field;
    double stationarity = 0.0;
};

/// o D f (unconstrained) or o D f - h* (constrained).
Residual sensitivity_residual(const ReferenceModel& model, const PathField& gradient, const CostSpec& spec,
                              bool constrained) {
    Residual out;
    PathField optional = model.projector().optional(gradient);
    if (!constrained) {
        out.field = std::move(optional);
        return out;
    }
    if (spec.p() == 2.0) {
        const PathField h = model.projector().predictable(optional);
        out.field = subtract(optional, h);
        return out;
    }
    const ExactProjector* exact = model.exact_projector();
    if (!exact) {
        throw ValidationError("martingale sensitivity with p != 2 needs an exact lattice (no L^q projection for ensembles)");
    }
    const LqProjection lq = exact->lq_predictable(optional, spec.q());
    out.field = subtract(optional, lq.h);
    out.stationarity = lq.worst_stationarity;
    return out;
}

}  // namespace

SensitivityReport assemble_report(std::string kind, const PathField& z, const std::vector<double>& path_weights,
                                  const std::vector<double>& time_weights, const CostSpec& spec,
                                  const Penalty& penalty, bool monte_carlo, const SensitivityOptions& options) {
    const double q = spec.q();
    const int steps = z.steps();
    if (path_weights.size() != z.paths() || time_weights.size() != static_cast<std::size_t>(steps)) {
        throw ValidationError("assemble_report: weight shapes do not match the field");
    }
    SensitivityReport report;
    report.kind = std::move(kind);
    report.p = spec.p();
    report.q = q;
    report.diagnostics.penalty = penalty.describe();

    std::vector<double> per_path(z.paths(), 0.0);
    std::vector<double> terms(z.paths());
    report.per_time_contribution.resize(static_cast<std::size_t>(steps));
    for (int n = 1; n <= steps; ++n) {
        const double tw = time_weights[static_cast<std::size_t>(n - 1)];
        for (std::size_t m = 0; m < z.paths(); ++m) {
            const double c = tw * lp_norm_pow(z.row(m, n), q);
            terms[m] = path_weights[m] * c;
            per_path[m] += c;
        }
        report.per_time_contribution[static_cast<std::size_t>(n - 1)] = pairwise_sum(terms);
    }
    const double rq = pairwise_sum(report.per_time_contribution);
    if (!std::isfinite(rq)) throw NumericalError("non-finite sensitivity norm");
    report.r_norm = std::pow(rq, 1.0 / q);

    const double conj = penalty.conjugate(report.r_norm);
    if (std::isinf(conj)) {
        report.upsilon = conj;
        report.u_star = std::numeric_limits<double>::infinity();
        report.diagnostics.notes.push_back("L*(r) is infinite: the penalty's final slope is below r");
    } else {
        report.upsilon = conj;
        report.u_star = penalty.optimal_u(report.r_norm);
    }

    if (monte_carlo && options.bootstrap_resamples > 1) {
        std::mt19937_64 rng(options.bootstrap_seed);
        std::uniform_int_distribution<std::size_t> pick(0, z.paths() - 1);
        std::vector<double> draws(static_cast<std::size_t>(options.bootstrap_resamples));
        std::vector<double> sample(z.paths());
        for (auto& d : draws) {
            for (std::size_t m = 0; m < z.paths(); ++m) {
                const std::size_t j = pick(rng);
                sample[m] = path_weights[j] * per_path[j];
            }
            d = std::pow(pairwise_sum(sample), 1.0 / q);
        }
        double mean = 0.0;
        for (double d : draws) mean += d;
        mean /= static_cast<double>(draws.size());
        double var = 0.0;
        for (double d : draws) var += (d - mean) * (d - mean);
        report.diagnostics.r_norm_se = std::sqrt(var / static_cast<double>(draws.size() - 1));
        report.diagnostics.bootstrap_resamples = options.bootstrap_resamples;
    }
    return report;
}

SensitivityReport upsilon(const ReferenceModel& model, const Payoff& f, const CostSpec& spec, const Penalty& penalty,
                          const SensitivityOptions& options) {
    const PathField gradient = malliavin_field(model, f, options.malliavin);
    const Residual z = sensitivity_residual(model, gradient, spec, false);
    SensitivityReport report = assemble_report("upsilon", z.field, model.weights(),
                                               discrete_time_weights(spec, model.steps()), spec, penalty,
                                               !model.is_exact(), options);
    fill_common(report, model, f, spec, penalty, options);
    if (options.keep_field) {
        PathField phi(z.field.paths(), z.field.steps(), z.field.dim());
        for (std::size_t m = 0; m < phi.paths(); ++m) {
            for (int n = 1; n <= phi.steps(); ++n) {
                const auto v = v_map(z.field.row(m, n), spec.q());
                std::copy(v.begin(), v.end(), phi.row(m, n).begin());
            }
        }
        report.adversarial_field = std::move(phi);
    }
    return report;
}

SensitivityReport upsilon_mart(const ReferenceModel& model, const Payoff& f, const CostSpec& spec,
                               const Penalty& penalty, const SensitivityOptions& options) {
    require_martingale(model);
    const PathField gradient = malliavin_field(model, f, options.malliavin);
    const Residual z = sensitivity_residual(model, gradient, spec, true);
    SensitivityReport report = assemble_report("upsilon_mart", z.field, model.weights(),
                                               discrete_time_weights(spec, model.steps()), spec, penalty,
                                               !model.is_exact(), options);
    fill_common(report, model, f, spec, penalty, options);
    report.diagnostics.lq_stationarity = z.stationarity;
    if (options.keep_field) {
        PathField phi(z.field.paths(), z.field.steps(), z.field.dim());
        for (std::size_t m = 0; m < phi.paths(); ++m) {
            for (int n = 1; n <= phi.steps(); ++n) {
                const auto v = v_map(z.field.row(m, n), spec.q());
                std::copy(v.begin(), v.end(), phi.row(m, n).begin());
            }
        }
        report.adversarial_field = std::move(phi);
    }
    return report;
}

AdversarialResult adversarial_map(const ReferenceModel& model, const Payoff& f, const CostSpec& spec,
                                  const Penalty& penalty, double delta, bool constrained,
                                  const SensitivityOptions& options) {
    if (!(delta > 0.0)) throw ValidationError("adversarial_map needs delta > 0");
    if (constrained) require_martingale(model);
    const double p = spec.p(), q = spec.q();
    const PathField gradient = malliavin_field(model, f, options.malliavin);
    const Residual z = sensitivity_residual(model, gradient, spec, constrained);

    AdversarialResult out;
    out.delta = delta;
    out.constrained = constrained;
    out.original = model.paths();
    out.probabilities = model.weights();
    out.phi = PathField(z.field.paths(), z.field.steps(), z.field.dim());

    // unscaled norm: sum_n E|z_n|_q^q
    std::vector<double> terms(model.size());
    for (std::size_t m = 0; m < model.size(); ++m) {
        double s = 0.0;
        for (int n = 1; n <= model.steps(); ++n) s += lp_norm_pow(z.field.row(m, n), q);
        terms[m] = model.weights()[m] * s;
    }
    const double raw_rq = pairwise_sum(terms);
    const double factor = spec.scale_factor(model.steps());
    // r of the scaled problem: r^q = raw r^q * factor^{-q/p}
    out.r_norm = std::pow(raw_rq, 1.0 / q) * std::pow(factor, -1.0 / p);
    if (out.r_norm == 0.0) {
        out.perturbed = out.original;
        if (model.is_exact()) out.perturbed_lattice = *model.lattice();
        return out;
    }
    out.u_star = penalty.optimal_u(out.r_norm);
    out.scale = out.u_star * delta / (std::pow(factor, 1.0 / p) * std::pow(raw_rq, 1.0 / p));

    out.perturbed.reserve(model.size());
    std::vector<double> gains(model.size()), costs(model.size());
    for (std::size_t m = 0; m < model.size(); ++m) {
        const DiscretePath& x = model.path(m);
        DiscretePath y = x;
        std::vector<double> shift(static_cast<std::size_t>(x.dim()), 0.0);
        for (int n = 1; n <= x.steps(); ++n) {
            const auto v = v_map(z.field.row(m, n), q);
            std::copy(v.begin(), v.end(), out.phi.row(m, n).begin());
            for (int i = 0; i < x.dim(); ++i) {
                shift[static_cast<std::size_t>(i)] += out.scale * v[static_cast<std::size_t>(i)];
                y.at(n, i) += shift[static_cast<std::size_t>(i)];
            }
        }
        gains[m] = model.weights()[m] * (f(y, model.grid()) - f(x, model.grid()));
        costs[m] = model.weights()[m] * cost_cn(x, y, spec);
        out.perturbed.push_back(std::move(y));
    }
    out.realized_gain = pairwise_sum(gains);
    out.realized_cost = pairwise_sum(costs);
    out.penalized_gain = out.realized_gain - delta * penalty.value(out.u_star);

    if (const ExactProjector* exact = model.exact_projector()) {
        std::vector<LatticeNode> nodes = model.lattice()->nodes();
        const auto& trail = exact->enumeration().nodes;
        for (std::size_t m = 0; m < model.size(); ++m) {
            for (int n = 1; n <= model.steps(); ++n) {
                auto& state = nodes[trail[m][static_cast<std::size_t>(n)]].state;
                const auto pt = out.perturbed[m].point(n);
                state.assign(pt.begin(), pt.end());
            }
        }
        out.perturbed_lattice = LatticeModel(model.dim(), std::move(nodes), false);
    }
    return out;
}

namespace {

nlohmann::ordered_json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_sig(v));
}

}  // namespace

std::string to_json(const SensitivityReport& report) {
    nlohmann::ordered_json j;
    j["kind"] = report.kind;
    j["upsilon"] = number(report.upsilon);
    j["r_norm"] = number(report.r_norm);
    j["u_star"] = number(report.u_star);
    j["p"] = number(report.p);
    j["q"] = number(report.q);
    auto& per_time = j["per_time_contribution"] = nlohmann::ordered_json::array();
    for (double c : report.per_time_contribution) per_time.push_back(number(c));
    const Diagnostics& d = report.diagnostics;
    auto& diag = j["diagnostics"];
    diag["backend"] = d.backend;
    diag["malliavin"] = d.malliavin;
    diag["penalty"] = d.penalty;
    diag["growth_ok"] = d.growth_ok;
    diag["growth_details"] = d.growth_details;
    diag["r_norm_se"] = number(d.r_norm_se);
    diag["bootstrap_resamples"] = d.bootstrap_resamples;
    diag["kink_mass"] = number(d.kink_mass);
    diag["lq_stationarity"] = number(d.lq_stationarity);
    diag["coarse_upsilon"] = number(d.coarse_upsilon);
    diag["notes"] = d.notes;
    return j.dump(2);
}

void write_per_time_csv(std::ostream& out, const SensitivityReport& report, const TimeGrid& grid) {
    out << "n,t,contribution\n";
    for (std::size_t k = 0; k < report.per_time_contribution.size(); ++k) {
        const int n = static_cast<int>(k) + 1;
        out << n << ',' << format_sig(grid[n]) << ',' << format_sig(report.per_time_contribution[k]) << '\n';
    }
}

}  // namespace adsens
