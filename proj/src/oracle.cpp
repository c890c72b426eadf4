#include "adsens/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "adsens/error.hpp"

namespace adsens {

namespace {

constexpr double kArmijo = 1e-4;

/// The node-field optimization problem on an enumerated lattice.
class MongeProblem {
public:
    MongeProblem(const LatticeModel& model, const Payoff& f, const CostSpec& spec, const Penalty& penalty,
                 double delta, bool constrained, const MalliavinBackend& backend)
        : model_(model), f_(f), spec_(spec), penalty_(penalty), delta_(delta), constrained_(constrained),
          backend_(backend), enumeration_(enumerate_paths(model)), grid_(TimeGrid::integer(model.steps())),
          dim_(model.dim()), node_mass_(model.size(), 0.0) {
        for (std::size_t m = 0; m < enumeration_.paths.size(); ++m) {
            for (std::size_t node : enumeration_.nodes[m]) node_mass_[node] += enumeration_.probabilities[m];
        }
        factor_ = spec.scale_factor(model.steps());
        indicator_ = penalty.family() == Penalty::Family::indicator;
        if (indicator_) budget_pow_ = std::pow(penalty.radius() * delta, spec.p()) / factor_;
    }

    std::size_t size() const { return model_.size() * static_cast<std::size_t>(dim_); }
    const PathEnumeration& enumeration() const { return enumeration_; }
    double node_mass(std::size_t node) const { return node_mass_[node]; }
    int dim() const { return dim_; }

    DiscretePath moved(std::size_t m, const std::vector<double>& phi) const {
        DiscretePath y = enumeration_.paths[m];
        std::vector<double> shift(static_cast<std::size_t>(dim_), 0.0);
        for (int n = 1; n <= y.steps(); ++n) {
            const std::size_t node = enumeration_.nodes[m][static_cast<std::size_t>(n)];
            for (int i = 0; i < dim_; ++i) {
                shift[static_cast<std::size_t>(i)] += phi[node * dim_ + i];
                y.at(n, i) += shift[static_cast<std::size_t>(i)];
            }
        }
        return y;
    }

    /// Unscaled sum over nodes of P(node) |phi_node|_p^p.
    double raw_cost(const std::vector<double>& phi) const {
        std::vector<double> terms(model_.size());
        for (std::size_t node = 0; node < model_.size(); ++node) {
            terms[node] = node_mass_[node] *
                          lp_norm_pow(std::span<const double>(phi.data() + node * dim_, static_cast<std::size_t>(dim_)),
                                      spec_.p());
        }
        return pairwise_sum(terms);
    }

    double expected_payoff(const std::vector<double>& phi) const {
        std::vector<double> terms(enumeration_.paths.size());
        for (std::size_t m = 0; m < terms.size(); ++m) terms[m] = enumeration_.probabilities[m] * f_(moved(m, phi), grid_);
        return pairwise_sum(terms);
    }

    double penalty_term(double raw_cost) const {
        if (indicator_) return 0.0;  // feasibility is enforced by the projection
        const double s = std::pow(factor_ * raw_cost, 1.0 / spec_.p());
        return delta_ * penalty_.value(s / delta_);
    }

    double objective(const std::vector<double>& phi) const {
        return expected_payoff(phi) - penalty_term(raw_cost(phi));
    }

    /// Gradient in the P(node)-weighted inner product.
    std::vector<double> gradient(const std::vector<double>& phi) const {
        std::vector<double> g(size(), 0.0);
        for (std::size_t m = 0; m < enumeration_.paths.size(); ++m) {
            const GradientField d = discrete_malliavin(f_, moved(m, phi), grid_, backend_);
            for (int n = 1; n <= model_.steps(); ++n) {
                const std::size_t node = enumeration_.nodes[m][static_cast<std::size_t>(n)];
                for (int i = 0; i < dim_; ++i) g[node * dim_ + i] += enumeration_.probabilities[m] * d.at(n, i);
            }
        }
        const double c = raw_cost(phi);
        const double p = spec_.p();
        double pen_scale = 0.0;
        if (!indicator_ && c > 0.0) {
            const double s = std::pow(factor_ * c, 1.0 / p);
            pen_scale = penalty_.slope(s / delta_) * std::pow(factor_, 1.0 / p) * std::pow(c, 1.0 / p - 1.0);
        }
        for (std::size_t node = 1; node < model_.size(); ++node) {
            for (int i = 0; i < dim_; ++i) {
                double& gi = g[node * dim_ + i];
                gi /= node_mass_[node];
                const double x = phi[node * dim_ + i];
                if (pen_scale != 0.0 && x != 0.0) gi -= pen_scale * std::copysign(std::pow(std::abs(x), p - 1.0), x);
            }
        }
        for (int i = 0; i < dim_; ++i) g[static_cast<std::size_t>(i)] = 0.0;
        return g;
    }

    void project(std::vector<double>& phi) const {
        tangent(phi);
        if (indicator_) {
            const double c = raw_cost(phi);
            if (c > budget_pow_) {
                const double s = std::pow(budget_pow_ / c, 1.0 / spec_.p());
                for (double& x : phi) x *= s;
            }
        }
    }

    /// Projection onto the linear constraints alone (root fixed, sibling means zero).
    void tangent(std::vector<double>& phi) const {
        for (int i = 0; i < dim_; ++i) phi[static_cast<std::size_t>(i)] = 0.0;
        if (constrained_) {
            for (const LatticeNode& node : model_.nodes()) {
                if (node.children.empty()) continue;
                for (int i = 0; i < dim_; ++i) {
                    double mean = 0.0, mass = 0.0;
                    for (const auto& [child, prob] : node.children) {
                        mean += prob * phi[child * dim_ + i];
                        mass += prob;
                    }
                    mean /= mass;
                    for (const auto& [child, prob] : node.children) phi[child * dim_ + i] -= mean;
                }
            }
        }
    }

    /// Scales a projected start onto the budget boundary (indicator) or to cost delta^p.
    void to_budget(std::vector<double>& phi) const {
        const double c = raw_cost(phi);
        if (c <= 0.0) return;
        const double target = indicator_ ? budget_pow_ : std::pow(delta_, spec_.p()) / factor_;
        const double s = std::pow(target / c, 1.0 / spec_.p()) * (indicator_ ? 1.0 - 1e-12 : 1.0);
        for (double& x : phi) x *= s;
    }

    double inner(const std::vector<double>& a, const std::vector<double>& b) const {
        std::vector<double> terms(model_.size(), 0.0);
        for (std::size_t node = 0; node < model_.size(); ++node) {
            double s = 0.0;
            for (int i = 0; i < dim_; ++i) s += a[node * dim_ + i] * b[node * dim_ + i];
            terms[node] = node_mass_[node] * s;
        }
        return pairwise_sum(terms);
    }

    double factor() const { return factor_; }

private:
    const LatticeModel& model_;
    const Payoff& f_;
    const CostSpec& spec_;
    const Penalty& penalty_;
    double delta_;
    bool constrained_;
    MalliavinBackend backend_;
    PathEnumeration enumeration_;
    TimeGrid grid_;
    int dim_;
    std::vector<double> node_mass_;
    double factor_ = 1.0;
    bool indicator_ = false;
    double budget_pow_ = 0.0;
};

struct AscentResult {
    std::vector<double> phi;
    double value = 0.0;
    int iterations = 0;
};

AscentResult ascend(const MongeProblem& problem, std::vector<double> phi, int max_iterations) {
    problem.project(phi);
    double value = problem.objective(phi);
    if (!std::isfinite(value)) throw NumericalError("oracle objective is not finite at the start point");
    double step = 1.0;
    int stalls = 0, it = 0;
    for (; it < max_iterations; ++it) {
        std::vector<double> g = problem.gradient(phi);
        problem.tangent(g);
        bool accepted = false;
        std::vector<double> trial(phi.size()), diff(phi.size());
        while (step > 1e-20) {
            for (std::size_t k = 0; k < phi.size(); ++k) trial[k] = phi[k] + step * g[k];
            problem.project(trial);
            for (std::size_t k = 0; k < phi.size(); ++k) diff[k] = trial[k] - phi[k];
            const double trial_value = problem.objective(trial);
            if (std::isfinite(trial_value) && trial_value >= value + kArmijo * problem.inner(g, diff)) {
                const double gain = trial_value - value;
                phi.swap(trial);
                value = trial_value;
                accepted = true;
                stalls = gain <= 1e-15 * (1.0 + std::abs(value)) ? stalls + 1 : 0;
                step = std::min(2.0 * step, 1e12);
                break;
            }
            step *= 0.5;
        }
        if (!accepted || stalls >= 5) break;
    }
    return {std::move(phi), value, it};
}

}  // namespace

OracleResult brute_force_value(const LatticeModel& model, const Payoff& f, const CostSpec& spec,
                               const Penalty& penalty, double delta, bool constrained,
                               const OracleOptions& options) {
    if (delta < 0.0) throw ValidationError("delta must be >= 0");
    if (model.size() > options.max_nodes) {
        throw ValidationError("oracle lattice has " + std::to_string(model.size()) + " nodes (limit " +
                              std::to_string(options.max_nodes) + ")");
    }
    const MongeProblem problem(model, f, spec, penalty, std::max(delta, 1e-300), constrained, options.malliavin);
    OracleResult out;
    const std::vector<double> zero(problem.size(), 0.0);
    out.base_value = problem.expected_payoff(zero);
    out.value = out.base_value;
    out.field = zero;
    out.best_start = "zero";
    if (delta == 0.0) return out;

    struct Start {
        std::string name;
        std::vector<double> phi;
    };
    std::vector<Start> starts;
    if (options.warm_start) {
        try {
            SensitivityOptions so;
            so.malliavin = options.malliavin;
            const AdversarialResult adv =
                adversarial_map(ReferenceModel::exact(model), f, spec, penalty, delta, constrained, so);
            std::vector<double> phi(problem.size(), 0.0);
            const auto& trail = problem.enumeration().nodes;
            for (std::size_t m = 0; m < adv.perturbed.size(); ++m) {
                for (int n = 1; n <= model.steps(); ++n) {
                    for (int i = 0; i < model.dim(); ++i) {
                        phi[trail[m][static_cast<std::size_t>(n)] * model.dim() + i] = adv.scale * adv.phi.at(m, n, i);
                    }
                }
            }
            starts.push_back({"adversarial", std::move(phi)});
        } catch (const ValidationError&) {
            // no first-order map for this configuration (e.g. constrained on a non-martingale)
        }
    }
    starts.push_back({"zero", zero});
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    for (int s = 0; s < options.random_starts; ++s) {
        std::vector<double> phi(problem.size());
        for (double& x : phi) x = normal(rng);
        problem.project(phi);
        problem.to_budget(phi);
        starts.push_back({"random" + std::to_string(s), std::move(phi)});
    }

    for (auto& start : starts) {
        AscentResult r = ascend(problem, std::move(start.phi), options.max_iterations);
        out.iterations += r.iterations;
        if (r.value > out.value) {
            out.value = r.value;
            out.field = std::move(r.phi);
            out.best_start = start.name;
        }
    }
    out.cost = problem.factor() * problem.raw_cost(out.field);
    out.gain = problem.expected_payoff(out.field) - out.base_value;
    return out;
}

SlopeCheck slope_check(const LatticeModel& model, const Payoff& f, const CostSpec& spec, const Penalty& penalty,
                       const std::vector<double>& deltas, bool constrained, const OracleOptions& options) {
    if (deltas.empty()) throw ValidationError("slope check needs at least one delta");
    for (double d : deltas) {
        if (!(d > 0.0)) throw ValidationError("ladder deltas must be positive");
    }
    SlopeCheck out;
    double s22 = 0.0, s23 = 0.0, s24 = 0.0, b1 = 0.0, b2 = 0.0;
    for (double d : deltas) {
        const OracleResult r = brute_force_value(model, f, spec, penalty, d, constrained, options);
        out.base_value = r.base_value;
        out.ladder.push_back({d, r.value, r.value - r.base_value});
        const double y = r.value - r.base_value;
        s22 += d * d;
        s23 += d * d * d;
        s24 += d * d * d * d;
        b1 += y * d;
        b2 += y * d * d;
    }
    const double det = s22 * s24 - s23 * s23;
    if (deltas.size() >= 2 && std::abs(det) > 1e-14 * s22 * s24) {
        out.slope = (b1 * s24 - b2 * s23) / det;
        out.curvature = (s22 * b2 - s23 * b1) / det;
    } else {
        out.slope = b1 / s22;
    }
    std::vector<SlopePoint> sorted = out.ladder;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.delta < b.delta; });
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k].increment < sorted[k - 1].increment - 1e-12) out.monotone = false;
    }
    SensitivityOptions so;
    so.malliavin = options.malliavin;
    const ReferenceModel ref = ReferenceModel::exact(model);
    const SensitivityReport report =
        constrained ? upsilon_mart(ref, f, spec, penalty, so) : upsilon(ref, f, spec, penalty, so);
    out.reference = report.upsilon;
    out.abs_error = std::abs(out.slope - out.reference);
    out.rel_error = out.reference != 0.0 ? out.abs_error / std::abs(out.reference) : out.abs_error;
    out.pass = out.abs_error <= std::max(0.05 * std::abs(out.reference), 1e-6);
    return out;
}

CostAudit coupling_cost_audit(const AdversarialResult& result, double delta, const CostSpec& spec,
                              const Penalty& penalty) {
    if (result.original.size() != result.perturbed.size() || result.original.size() != result.probabilities.size()) {
        throw ValidationError("coupling audit: original and perturbed populations differ in size");
    }
    std::vector<double> terms(result.original.size());
    for (std::size_t m = 0; m < terms.size(); ++m) {
        terms[m] = result.probabilities[m] * cost_cn(result.original[m], result.perturbed[m], spec);
    }
    CostAudit out;
    out.cost = pairwise_sum(terms);
    const double u = result.r_norm > 0.0 ? penalty.optimal_u(result.r_norm) : 0.0;
    out.bound = std::pow(u * delta, spec.p());
    out.pass = out.cost <= out.bound * (1.0 + 1e-9);
    return out;
}

}  // namespace adsens
