#pragma once

// Optional (E[. | F_n]) and predictable (E[. | F_{n-1}]) projections of per-time fields.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsens/ensemble.hpp"
#include "adsens/field.hpp"
#include "adsens/lattice.hpp"

namespace adsens {

enum class ProjectionKind { optional, predictable };

class Projector {
public:
    virtual ~Projector() = default;
    virtual PathField optional(const PathField& field) const = 0;
    virtual PathField predictable(const PathField& field) const = 0;
    virtual bool exact() const = 0;
    virtual std::string describe() const = 0;

    PathField project(const PathField& field, ProjectionKind kind) const {
        return kind == ProjectionKind::optional ? optional(field) : predictable(field);
    }
};

/// Per-node solve report of the L^q predictable projection.
struct LqProjection {
    PathField h;
    /// (E sum_n |Z_n - h_n|_q^q)^{1/q}
    double residual_norm = 0.0;
    /// max over nodes and components of |E[v(Z - h) | F_{n-1}]|
    double worst_stationarity = 0.0;
    int iterations = 0;
};

/// Exact conditional expectations on an enumerated lattice: a path's value at time n is
/// replaced by the probability-weighted average over all paths through the same node.
class ExactProjector final : public Projector {
public:
    explicit ExactProjector(PathEnumeration enumeration);

    PathField optional(const PathField& field) const override;
    PathField predictable(const PathField& field) const override;
    bool exact() const override { return true; }
    std::string describe() const override { return "exact"; }

    /// h* minimizing E[sum_n |Z_n - h_n|_q^q] over predictable h. The objective separates per
    /// (time n-1 node, component) into convex 1-d problems solved by safeguarded Newton.
    LqProjection lq_predictable(const PathField& field, double q) const;

    const PathEnumeration& enumeration() const { return enumeration_; }

private:
    PathField conditional_mean(const PathField& field, int lag) const;

    PathEnumeration enumeration_;
    std::size_t node_count_ = 0;
};

/// Features of the path history used as regressors, e.g. `poly:3:state,runmean`.
struct BasisSpec {
    int degree = 3;
    bool state = true;
    bool running_mean = true;
    bool previous = false;  // x_{n-1}

    static BasisSpec parse(const std::string& spec);
    std::string describe() const;
    /// Number of raw features per path and time (before monomial expansion) for dimension d.
    int feature_count(int dim) const;
    /// Number of monomials of total degree <= degree in feature_count(dim) variables.
    std::size_t size(int dim) const;
};

/// Least-squares Monte Carlo surrogate for conditional expectations on an ensemble.
class RegressionProjector final : public Projector {
public:
    RegressionProjector(const SampleEnsemble& ensemble, BasisSpec basis, double ridge = 1e-8,
                        bool cross_fit = false);

    PathField optional(const PathField& field) const override;
    PathField predictable(const PathField& field) const override;
    bool exact() const override { return false; }
    std::string describe() const override;

    /// Fit on the paths listed in `sample` (with repeats), evaluate on every path.
    PathField fit_subset(const PathField& field, ProjectionKind kind, const std::vector<std::size_t>& sample) const;

    const BasisSpec& basis() const { return basis_; }

private:
    PathField fit(const PathField& field, ProjectionKind kind, const std::vector<std::size_t>* sample) const;

    const SampleEnsemble* ensemble_;
    BasisSpec basis_;
    double ridge_;
    bool cross_fit_;
};

PathField optional_projection(const LatticeModel& model, const PathField& field);
PathField predictable_projection(const LatticeModel& model, const PathField& field);
LqProjection lq_predictable_projection(const LatticeModel& model, const PathField& field, double q);
PathField regression_projection(const SampleEnsemble& ensemble, const PathField& field, ProjectionKind kind,
                                const BasisSpec& basis);

/// Bootstrap L^2 standard error of the regression projection: the root-mean-square distance
/// between refits on resampled paths and the full-sample fit, evaluated on all paths.
double regression_bootstrap_se(const SampleEnsemble& ensemble, const PathField& field, ProjectionKind kind,
                               const BasisSpec& basis, int resamples, std::uint64_t seed);

/// sqrt(E sum_n |a_n - b_n|^2) under the given path weights.
double l2_distance(const PathField& a, const PathField& b, const std::vector<double>& weights);

/// CSV `path_id,n,component,value`.
void write_field_csv(std::ostream& out, const PathField& field);

}  // namespace adsens
