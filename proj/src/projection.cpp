#include "adsens/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "adsens/core.hpp"
#include "adsens/error.hpp"

namespace adsens {

// ---------------------------------------------------------------------------
// exact backend

ExactProjector::ExactProjector(PathEnumeration enumeration) : enumeration_(std::move(enumeration)) {
    for (const auto& trail : enumeration_.nodes) {
        for (std::size_t id : trail) node_count_ = std::max(node_count_, id + 1);
    }
}

PathField ExactProjector::conditional_mean(const PathField& field, int lag) const {
    const auto& probs = enumeration_.probabilities;
    if (field.paths() != probs.size()) throw ValidationError("field does not match the enumerated lattice");
    const int steps = field.steps();
    const int dim = field.dim();
    PathField out(field.paths(), steps, dim);
    std::vector<double> sums(node_count_ * static_cast<std::size_t>(dim));
    std::vector<double> mass(node_count_);
    for (int n = 1; n <= steps; ++n) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(mass.begin(), mass.end(), 0.0);
        for (std::size_t m = 0; m < field.paths(); ++m) {
            const std::size_t node = enumeration_.nodes[m][static_cast<std::size_t>(n - lag)];
            mass[node] += probs[m];
            for (int i = 0; i < dim; ++i) sums[node * dim + i] += probs[m] * field.at(m, n, i);
        }
        for (std::size_t m = 0; m < field.paths(); ++m) {
            const std::size_t node = enumeration_.nodes[m][static_cast<std::size_t>(n - lag)];
            for (int i = 0; i < dim; ++i) out.at(m, n, i) = sums[node * dim + i] / mass[node];
        }
    }
    return out;
}

PathField ExactProjector::optional(const PathField& field) const { return conditional_mean(field, 0); }

PathField ExactProjector::predictable(const PathField& field) const { return conditional_mean(field, 1); }

namespace {

struct ScalarLqSolve {
    double h = 0.0;
    double stationarity = 0.0;  // |sum w sgn(z - h)|z - h|^{q-1}| / sum w
    int iterations = 0;
};

double signed_power(double x, double e) {
    return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), e), x);
}

/// argmin_h sum_k w_k |z_k - h|^q for q > 1 via Newton on the monotone first-order condition,
/// falling back to bisection whenever a step leaves the bracket.
ScalarLqSolve solve_scalar_lq(const std::vector<double>& z, const std::vector<double>& w, double q) {
    double total = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        total += w[k];
        mean += w[k] * z[k];
    }
    mean /= total;
    const auto [zmin_it, zmax_it] = std::minmax_element(z.begin(), z.end());
    double lo = *zmin_it, hi = *zmax_it;
    if (q == 2.0 || lo == hi) {
        ScalarLqSolve s;
        s.h = lo == hi ? lo : mean;
        double f = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) f += w[k] * (z[k] - s.h);
        s.stationarity = std::abs(f) / total;
        return s;
    }
    // F(h) = sum w sgn(z - h)|z - h|^{q-1} / total, decreasing in h; F(lo) >= 0 >= F(hi)
    auto eval = [&](double h, double& deriv) {
        double f = 0.0, d = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double e = z[k] - h;
            f += w[k] * signed_power(e, q - 1.0);
            d += w[k] * (e == 0.0 ? (q < 2.0 ? std::numeric_limits<double>::infinity() : 0.0)
                                  : std::pow(std::abs(e), q - 2.0));
        }
        deriv = -(q - 1.0) * d / total;
        return f / total;
    };
    const double scale = std::max(hi - lo, 1e-300);
    ScalarLqSolve s;
    double h = std::clamp(mean, lo, hi);
    double previous = std::numeric_limits<double>::infinity();
    for (s.iterations = 1; s.iterations <= 400; ++s.iterations) {
        double deriv = 0.0;
        const double f = eval(h, deriv);
        if (f > 0.0) lo = h;
        else hi = h;
        if (std::abs(f) < 1e-13 * std::pow(scale, q - 1.0) || hi - lo <= 4e-16 * std::max(1.0, std::abs(h))) {
            s.h = h;
            s.stationarity = std::abs(f);
            return s;
        }
        // Newton while it at least halves |F|, bisection otherwise
        const bool newton = std::isfinite(deriv) && deriv < 0.0 && std::abs(f) <= 0.5 * previous;
        previous = std::abs(f);
        double next = newton ? h - f / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - h) <= 4e-16 * std::max(1.0, std::abs(h))) {
            s.h = next;
            s.stationarity = std::abs(eval(next, deriv));
            return s;
        }
        h = next;
    }
    double deriv = 0.0;
    s.h = h;
    s.stationarity = std::abs(eval(h, deriv));
    return s;
}

}  // namespace

LqProjection ExactProjector::lq_predictable(const PathField& field, double q) const {
    if (!(q > 1.0) || !std::isfinite(q)) throw ValidationError("L^q projection needs 1 < q < inf");
    const auto& probs = enumeration_.probabilities;
    if (field.paths() != probs.size()) throw ValidationError("field does not match the enumerated lattice");
    const int steps = field.steps();
    const int dim = field.dim();
    LqProjection out;
    out.h = PathField(field.paths(), steps, dim);
    std::vector<std::vector<std::size_t>> groups(node_count_);
    std::vector<double> residual_terms;
    residual_terms.reserve(field.paths());
    std::vector<double> residual_by_path(field.paths(), 0.0);
    for (int n = 1; n <= steps; ++n) {
        for (auto& g : groups) g.clear();
        for (std::size_t m = 0; m < field.paths(); ++m) {
            groups[enumeration_.nodes[m][static_cast<std::size_t>(n - 1)]].push_back(m);
        }
        for (const auto& members : groups) {
            if (members.empty()) continue;
            std::vector<double> z(members.size()), w(members.size());
            for (int i = 0; i < dim; ++i) {
                for (std::size_t k = 0; k < members.size(); ++k) {
                    z[k] = field.at(members[k], n, i);
                    w[k] = probs[members[k]];
                }
                const ScalarLqSolve s = solve_scalar_lq(z, w, q);
                out.worst_stationarity = std::max(out.worst_stationarity, s.stationarity);
                out.iterations = std::max(out.iterations, s.iterations);
                if (s.iterations > 400) {
                    throw NumericalError("L^q projection did not converge at time " + std::to_string(n - 1));
                }
                for (std::size_t k = 0; k < members.size(); ++k) {
                    out.h.at(members[k], n, i) = s.h;
                    residual_by_path[members[k]] += std::pow(std::abs(z[k] - s.h), q);
                }
            }
        }
    }
    for (std::size_t m = 0; m < field.paths(); ++m) residual_terms.push_back(probs[m] * residual_by_path[m]);
    out.residual_norm = std::pow(pairwise_sum(residual_terms), 1.0 / q);
    return out;
}

// ---------------------------------------------------------------------------
// regression backend

BasisSpec BasisSpec::parse(const std::string& spec) {
    // poly:<degree>:<feature>,<feature>
    BasisSpec b;
    b.state = b.running_mean = b.previous = false;
    std::stringstream ss(spec);
    std::string kind, degree, features;
    std::getline(ss, kind, ':');
    std::getline(ss, degree, ':');
    std::getline(ss, features);
    if (kind != "poly") throw ValidationError("basis spec must look like poly:<degree>:<features>, got '" + spec + "'");
    try {
        b.degree = std::stoi(degree);
    } catch (const std::exception&) {
        throw ValidationError("basis degree must be an integer in '" + spec + "'");
    }
    if (b.degree < 0 || b.degree > 8) throw ValidationError("basis degree must lie in 0..8");
    std::stringstream fs(features);
    std::string f;
    while (std::getline(fs, f, ',')) {
        if (f == "state") b.state = true;
        else if (f == "runmean") b.running_mean = true;
        else if (f == "prev") b.previous = true;
        else if (!f.empty()) throw ValidationError("unknown basis feature '" + f + "' (state, runmean, prev)");
    }
    return b;
}

std::string BasisSpec::describe() const {
    std::string out = "poly:" + std::to_string(degree) + ":";
    std::string sep;
    if (state) out += sep + "state", sep = ",";
    if (running_mean) out += sep + "runmean", sep = ",";
    if (previous) out += sep + "prev", sep = ",";
    return out;
}

int BasisSpec::feature_count(int dim) const {
    return dim * ((state ? 1 : 0) + (running_mean ? 1 : 0) + (previous ? 1 : 0));
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Exponent tuples of all monomials with total degree <= degree, constant first.
std::vector<std::vector<int>> monomials(int vars, int degree) {
    std::vector<std::vector<int>> out{std::vector<int>(static_cast<std::size_t>(vars), 0)};
    std::vector<std::vector<int>> frontier = out;
    for (int deg = 1; deg <= degree; ++deg) {
        std::vector<std::vector<int>> next;
        for (const auto& m : frontier) {
            // extend only at or after the last nonzero index to avoid duplicates
            int last = 0;
            for (int v = 0; v < vars; ++v) {
                if (m[v] > 0) last = v;
            }
            for (int v = last; v < vars; ++v) {
                auto e = m;
                ++e[v];
                next.push_back(std::move(e));
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

void history_features(const BasisSpec& basis, const DiscretePath& x, int t, std::vector<double>& out) {
    out.clear();
    const int dim = x.dim();
    if (basis.state) {
        for (int i = 0; i < dim; ++i) out.push_back(x.at(t, i));
    }
    if (basis.running_mean) {
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int k = 0; k <= t; ++k) s += x.at(k, i);
            out.push_back(s / static_cast<double>(t + 1));
        }
    }
    if (basis.previous) {
        for (int i = 0; i < dim; ++i) out.push_back(t > 0 ? x.at(t - 1, i) : 0.0);
    }
}

}  // namespace

std::size_t BasisSpec::size(int dim) const {
    const auto f = static_cast<std::size_t>(feature_count(dim));
    return binomial(f + static_cast<std::size_t>(degree), static_cast<std::size_t>(degree));
}

RegressionProjector::RegressionProjector(const SampleEnsemble& ensemble, BasisSpec basis, double ridge, bool cross_fit)
    : ensemble_(&ensemble), basis_(basis), ridge_(ridge), cross_fit_(cross_fit) {
    const std::size_t k = basis_.size(ensemble.dim());
    if (ensemble.size() < 10 * k) {
        throw ValidationError("regression needs M >= 10 x basis size (" + std::to_string(10 * k) + " paths)");
    }
}

std::string RegressionProjector::describe() const {
    return "regression(" + basis_.describe() + (cross_fit_ ? ",cross-fit" : "") + ")";
}

PathField RegressionProjector::optional(const PathField& field) const {
    return fit(field, ProjectionKind::optional, nullptr);
}

PathField RegressionProjector::predictable(const PathField& field) const {
    return fit(field, ProjectionKind::predictable, nullptr);
}

PathField RegressionProjector::fit_subset(const PathField& field, ProjectionKind kind,
                                          const std::vector<std::size_t>& sample) const {
    return fit(field, kind, &sample);
}

PathField RegressionProjector::fit(const PathField& field, ProjectionKind kind,
                                   const std::vector<std::size_t>* sample) const {
    const SampleEnsemble& ens = *ensemble_;
    const std::size_t count = ens.size();
    if (field.paths() != count || field.steps() != ens.steps()) {
        throw ValidationError("field does not match the ensemble");
    }
    const int steps = field.steps();
    const int dim = field.dim();
    const int raw_count = basis_.feature_count(ens.dim());
    PathField out(count, steps, dim);

    // rows enter the normal equations with these multiplicities
    Eigen::VectorXd all = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(count));
    Eigen::VectorXd fold_a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    Eigen::VectorXd fold_b = fold_a;
    Eigen::VectorXd resample = fold_a;
    if (sample) {
        for (std::size_t m : *sample) {
            if (m >= count) throw ValidationError("bootstrap sample index out of range");
            resample(static_cast<Eigen::Index>(m)) += 1.0;
        }
    }
    for (std::size_t m = 0; m < count; ++m) (m % 2 == 0 ? fold_a : fold_b)(static_cast<Eigen::Index>(m)) = 1.0;

    Eigen::MatrixXd raw(static_cast<Eigen::Index>(count), raw_count);
    std::vector<double> feat;
    for (int n = 1; n <= steps; ++n) {
        const int t = kind == ProjectionKind::optional ? n : n - 1;
        for (std::size_t m = 0; m < count; ++m) {
            history_features(basis_, ens.path(m), t, feat);
            for (int c = 0; c < raw_count; ++c) raw(static_cast<Eigen::Index>(m), c) = feat[c];
        }
        // standardize and drop features that do not vary at this time
        std::vector<int> keep;
        Eigen::VectorXd mu(raw_count), sd(raw_count);
        for (int c = 0; c < raw_count; ++c) {
            mu(c) = raw.col(c).mean();
            sd(c) = std::sqrt((raw.col(c).array() - mu(c)).square().mean());
            if (sd(c) > 1e-12 * std::max(1.0, std::abs(mu(c)))) keep.push_back(c);
        }
        const auto terms = monomials(static_cast<int>(keep.size()), basis_.degree);
        const auto k = static_cast<Eigen::Index>(terms.size());
        Eigen::MatrixXd design(static_cast<Eigen::Index>(count), k);
        auto design_row = [&](std::size_t m) {
            const auto r = static_cast<Eigen::Index>(m);
            for (Eigen::Index j = 0; j < k; ++j) {
                double v = 1.0;
                for (std::size_t c = 0; c < keep.size(); ++c) {
                    const int e = terms[static_cast<std::size_t>(j)][c];
                    if (e == 0) continue;
                    const double z = (raw(static_cast<Eigen::Index>(m), keep[c]) - mu(keep[c])) / sd(keep[c]);
                    for (int power = 0; power < e; ++power) v *= z;
                }
                design(r, j) = v;
            }
        };
        for (std::size_t m = 0; m < count; ++m) design_row(m);
        Eigen::MatrixXd target(static_cast<Eigen::Index>(count), dim);
        for (std::size_t m = 0; m < count; ++m) {
            for (int i = 0; i < dim; ++i) target(static_cast<Eigen::Index>(m), i) = field.at(m, n, i);
        }

        auto solve = [&](const Eigen::VectorXd& counts) {
            const double n_rows = counts.sum();
            const Eigen::MatrixXd weighted = design.array().colwise() * counts.array();
            Eigen::MatrixXd gram = weighted.transpose() * design / n_rows;
            Eigen::MatrixXd rhs = weighted.transpose() * target / n_rows;
            const double damping = ridge_ * std::max(gram.diagonal().mean(), 1e-300);
            // the intercept stays undamped so constant fields are reproduced exactly
            gram.diagonal().tail(k - 1).array() += damping;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
            if (ldlt.info() != Eigen::Success) throw NumericalError("regression design is rank-deficient after damping");
            const auto d = ldlt.vectorD();
            if (d.minCoeff() <= 1e-14 * d.maxCoeff()) {
                throw NumericalError("regression design is rank-deficient after damping at time " + std::to_string(n));
            }
            Eigen::MatrixXd coef = ldlt.solve(rhs);
            // iterated Tikhonov: the damping only survives in near-null directions
            const Eigen::MatrixXd plain = weighted.transpose() * design / n_rows;
            for (int sweep = 0; sweep < 2; ++sweep) coef += ldlt.solve(rhs - plain * coef);
            if (!coef.allFinite()) throw NumericalError("regression produced non-finite coefficients");
            return coef;
        };
        auto write = [&](const Eigen::MatrixXd& coef, const Eigen::VectorXd* only) {
            const Eigen::MatrixXd fitted = design * coef;
            for (std::size_t m = 0; m < count; ++m) {
                if (only && (*only)(static_cast<Eigen::Index>(m)) == 0.0) continue;
                for (int i = 0; i < dim; ++i) out.at(m, n, i) = fitted(static_cast<Eigen::Index>(m), i);
            }
        };
        if (sample) {
            write(solve(resample), nullptr);
        } else if (cross_fit_) {
            write(solve(fold_a), &fold_b);
            write(solve(fold_b), &fold_a);
        } else {
            write(solve(all), nullptr);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// free functions

PathField optional_projection(const LatticeModel& model, const PathField& field) {
    return ExactProjector(enumerate_paths(model)).optional(field);
}

PathField predictable_projection(const LatticeModel& model, const PathField& field) {
    return ExactProjector(enumerate_paths(model)).predictable(field);
}

LqProjection lq_predictable_projection(const LatticeModel& model, const PathField& field, double q) {
    return ExactProjector(enumerate_paths(model)).lq_predictable(field, q);
}

PathField regression_projection(const SampleEnsemble& ensemble, const PathField& field, ProjectionKind kind,
                                const BasisSpec& basis) {
    return RegressionProjector(ensemble, basis).project(field, kind);
}

double l2_distance(const PathField& a, const PathField& b, const std::vector<double>& weights) {
    if (a.data().size() != b.data().size() || a.paths() != weights.size()) {
        throw ValidationError("l2_distance: shape mismatch");
    }
    std::vector<double> terms(a.paths());
    const std::size_t stride = a.data().size() / std::max<std::size_t>(a.paths(), 1);
    for (std::size_t m = 0; m < a.paths(); ++m) {
        double s = 0.0;
        for (std::size_t k = m * stride; k < (m + 1) * stride; ++k) {
            const double d = a.data()[k] - b.data()[k];
            s += d * d;
        }
        terms[m] = weights[m] * s;
    }
    return std::sqrt(pairwise_sum(terms));
}

double regression_bootstrap_se(const SampleEnsemble& ensemble, const PathField& field, ProjectionKind kind,
                               const BasisSpec& basis, int resamples, std::uint64_t seed) {
    if (resamples < 2) throw ValidationError("bootstrap needs at least two resamples");
    RegressionProjector projector(ensemble, basis);
    const PathField full = projector.project(field, kind);
    const std::vector<double> weights(ensemble.size(), ensemble.weight());
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, ensemble.size() - 1);
    std::vector<std::size_t> sample(ensemble.size());
    double acc = 0.0;
    for (int b = 0; b < resamples; ++b) {
        for (auto& s : sample) s = pick(rng);
        const PathField refit = projector.fit_subset(field, kind, sample);
        const double d = l2_distance(refit, full, weights);
        acc += d * d;
    }
    return std::sqrt(acc / resamples);
}

void write_field_csv(std::ostream& out, const PathField& field) {
    out << "path_id,n,component,value\n";
    const auto old = out.precision(12);
    for (std::size_t m = 0; m < field.paths(); ++m) {
        for (int n = 1; n <= field.steps(); ++n) {
            for (int i = 0; i < field.dim(); ++i) out << m << ',' << n << ',' << i + 1 << ',' << field.at(m, n, i) << '\n';
        }
    }
    out.precision(old);
}

}  // namespace adsens
