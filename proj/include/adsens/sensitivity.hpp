#pragma once

// First-order sensitivities of the robust value: Upsilon (unconstrained) and Upsilon_Mart
// (martingale-constrained), and the adversarial perturbation that attains them.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adsens/core.hpp"
#include "adsens/ensemble.hpp"
#include "adsens/field.hpp"
#include "adsens/lattice.hpp"
#include "adsens/malliavin.hpp"
#include "adsens/penalty.hpp"
#include "adsens/projection.hpp"

namespace adsens {

/// The reference measure mu, either as an enumerated lattice (exact conditional expectations)
/// or as a Monte Carlo ensemble (regression conditional expectations).
class ReferenceModel {
public:
    static ReferenceModel exact(const LatticeModel& model);
    /// `martingale` is the caller's claim about the sampled law; it cannot be checked exactly.
    static ReferenceModel monte_carlo(SampleEnsemble ensemble, BasisSpec basis = {}, bool martingale = true,
                                      bool cross_fit = false);

    bool is_exact() const { return static_cast<bool>(lattice_); }
    std::size_t size() const { return paths_->size(); }
    int steps() const { return grid_.steps(); }
    int dim() const { return paths_->front().dim(); }
    const DiscretePath& path(std::size_t m) const { return (*paths_)[m]; }
    const std::vector<DiscretePath>& paths() const { return *paths_; }
    const std::vector<double>& weights() const { return weights_; }
    const TimeGrid& grid() const { return grid_; }
    const Projector& projector() const { return *projector_; }

    const LatticeModel* lattice() const { return lattice_.get(); }
    /// Non-null for exact models.
    const ExactProjector* exact_projector() const;
    /// Non-null for Monte Carlo models.
    const SampleEnsemble* ensemble() const { return ensemble_.get(); }

    bool claims_martingale() const { return martingale_; }
    std::string describe() const;

private:
    ReferenceModel() = default;

    std::shared_ptr<const LatticeModel> lattice_;
    std::shared_ptr<const SampleEnsemble> ensemble_;
    std::shared_ptr<const Projector> projector_;
    const std::vector<DiscretePath>* paths_ = nullptr;
    std::vector<double> weights_;
    TimeGrid grid_;
    bool martingale_ = false;
};

struct SensitivityOptions {
    MalliavinBackend malliavin{};
    /// Resamples for the Monte Carlo error bar of r_norm; 0 disables it.
    int bootstrap_resamples = 200;
    std::uint64_t bootstrap_seed = 1;
    /// Keep the per-path direction field Phi in the report.
    bool keep_field = false;
};

struct Diagnostics {
    std::string backend;
    std::string malliavin;
    std::string penalty;
    bool growth_ok = true;
    std::string growth_details;
    /// Bootstrap standard error of r_norm (Monte Carlo backends), NaN otherwise.
    double r_norm_se = std::numeric_limits<double>::quiet_NaN();
    int bootstrap_resamples = 0;
    /// Probability mass of paths sitting on a kink of the payoff.
    double kink_mass = 0.0;
    /// Worst |E[v(Z - h*) | F_{n-1}]| of the general-p projection (0 when p = 2).
    double lq_stationarity = 0.0;
    /// Upsilon on the grid coarsened by 2, NaN when not computed.
    double coarse_upsilon = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> notes;
};

struct SensitivityReport {
    std::string kind;
    double upsilon = 0.0;
    /// The L^q norm inside L*.
    double r_norm = 0.0;
    /// Maximizer of u r - L(u).
    double u_star = 0.0;
    double p = 2.0;
    double q = 2.0;
    /// E|Z_n|_q^q per time (times dt in continuous time); their sum is r_norm^q.
    std::vector<double> per_time_contribution;
    /// Phi_n = v(Z_n) per path, the unnormalized adversarial increments.
    std::optional<PathField> adversarial_field;
    Diagnostics diagnostics;
};

/// Componentwise signed power e_i |e_i|^{q-2}; v(0) = 0.
std::vector<double> v_map(std::span<const double> e, double q);

/// D f for every path of the model (rows n = 1..N).
PathField malliavin_field(const ReferenceModel& model, const Payoff& f, const MalliavinBackend& backend = {});

/// Upsilon = L*(|| o D f ||_{L^q}).
SensitivityReport upsilon(const ReferenceModel& model, const Payoff& f, const CostSpec& spec, const Penalty& penalty,
                          const SensitivityOptions& options = {});

/// Upsilon_Mart = L*(inf_h || o D f - h ||_{L^q}) over predictable h. For p = 2, h is the
/// predictable projection; other p need an exact lattice.
SensitivityReport upsilon_mart(const ReferenceModel& model, const Payoff& f, const CostSpec& spec,
                               const Penalty& penalty, const SensitivityOptions& options = {});

/// Report assembly shared with the continuous-time estimators: r^q = sum_n time_weight_n *
/// E|z_n|_q^q, Upsilon = L*(r).
SensitivityReport assemble_report(std::string kind, const PathField& z, const std::vector<double>& path_weights,
                                  const std::vector<double>& time_weights, const CostSpec& spec,
                                  const Penalty& penalty, bool monte_carlo, const SensitivityOptions& options);

struct AdversarialResult {
    std::vector<DiscretePath> original;
    std::vector<DiscretePath> perturbed;
    std::vector<double> probabilities;
    /// Same tree as the reference lattice with moved states (exact models only).
    std::optional<LatticeModel> perturbed_lattice;
    double delta = 0.0;
    double r_norm = 0.0;
    double u_star = 0.0;
    /// u delta / r^{q/p}: the factor applied to Phi.
    double scale = 0.0;
    /// E[c_N(X, Y)]
    double realized_cost = 0.0;
    /// E[f(Y) - f(X)]
    double realized_gain = 0.0;
    /// realized_gain - delta L(u_star): the penalized objective at the designed budget
    double penalized_gain = 0.0;
    bool constrained = false;
    /// Unnormalized increments Phi per path.
    PathField phi;
};

/// x -> x + u delta Delta^{-1} Phi(x) / r^{q/p} with Phi_n = v(o D_n f - h*_n) (h* = 0 when
/// unconstrained). Returns the unperturbed model with zero gain when r = 0.
AdversarialResult adversarial_map(const ReferenceModel& model, const Payoff& f, const CostSpec& spec,
                                  const Penalty& penalty, double delta, bool constrained,
                                  const SensitivityOptions& options = {});

/// JSON text of a report (numbers with 12 significant digits).
std::string to_json(const SensitivityReport& report);
/// CSV `n,t,contribution`.
void write_per_time_csv(std::ostream& out, const SensitivityReport& report, const TimeGrid& grid);

}  // namespace adsens
