// adsens: command-line front end.
//
//   adsens sens discrete   --model walk:N=10 --payoff asian:K=0 --p 2 --penalty indicator:1 --mart
//   adsens sens hyperbolic --model brownian:T=1,N=64,M=100000,seed=1 --payoff merton:lambda=0.5
//   adsens sens parabolic  --sigma const:0.2 --utility quad
//   adsens repro asian-figure | merton | logcontract | quadvar
//   adsens oracle check    --model walk:N=2 --payoff cubic:c3=1,c2=0.1 --deltas 0.1,0.05,0.025,0.0125
//   adsens rerun <manifest.json>
//
// Exit codes: 0 success, 1 failed check, 2 invalid input, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adsens/continuous.hpp"
#include "adsens/core.hpp"
#include "adsens/ensemble.hpp"
#include "adsens/error.hpp"
#include "adsens/lattice.hpp"
#include "adsens/oracle.hpp"
#include "adsens/payoffs.hpp"
#include "adsens/penalty.hpp"
#include "adsens/projection.hpp"
#include "adsens/repro.hpp"
#include "adsens/sensitivity.hpp"
#include "adsens/sigma.hpp"
#include "adsens/spec_parse.hpp"

namespace fs = std::filesystem;
using namespace adsens;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Model {
    std::optional<LatticeModel> lattice;
    std::optional<SampleEnsemble> ensemble;
    std::string resolved;
};

Model parse_model(const std::string& spec) {
    const FamilySpec f = parse_family(spec);
    Model out;
    if (f.family == "walk") {
        const auto n = f.integer("N", 10);
        const double jump = f.number("jump", 1.0), pup = f.number("pup", 0.5);
        if (n < 1 || n > 20) throw ValidationError("walk needs 1 <= N <= 20");
        out.lattice = LatticeModel::binary_walk(static_cast<int>(n), jump, pup);
        out.resolved = "walk:N=" + std::to_string(n) + ",jump=" + format_sig(jump) + ",pup=" + format_sig(pup);
    } else if (f.family == "lattice") {
        const std::string file = f.positional.empty() ? f.text("file", "") : f.positional;
        out.lattice = LatticeModel::load(file);
        out.resolved = "lattice:" + file;
    } else if (f.family == "brownian") {
        const double t = f.number("T", 1.0);
        const auto n = f.integer("N", 64), d = f.integer("d", 1), m = f.integer("M", 20000), seed = f.integer("seed", 1);
        if (!(t > 0.0) || n < 1 || d < 1 || m < 1 || seed < 0) throw ValidationError("brownian parameters must be positive");
        out.ensemble = sample_brownian(t, static_cast<int>(n), static_cast<int>(d), static_cast<std::size_t>(m),
                                       static_cast<std::uint64_t>(seed));
        out.resolved = "brownian:T=" + format_sig(t) + ",N=" + std::to_string(n) + ",d=" + std::to_string(d) +
                       ",M=" + std::to_string(m) + ",seed=" + std::to_string(seed);
    } else {
        throw ValidationError("unknown model '" + f.family + "' (walk, lattice, brownian)");
    }
    return out;
}

MalliavinBackend parse_malliavin(const std::string& name, double eps, bool richardson) {
    if (name == "auto") return {MalliavinBackend::Kind::automatic, eps, richardson};
    if (name == "analytic") return MalliavinBackend::analytic();
    if (name == "bump") return MalliavinBackend::bump(eps, richardson);
    throw ValidationError("unknown Malliavin backend '" + name + "' (auto, analytic, bump)");
}

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("ADSENS_OUT"); env && *env) return env;
    return "adsens-out";
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

void write_manifest(const fs::path& dir, const std::vector<std::string>& args, const json& resolved) {
    json m;
    m["argv"] = args;
    m["resolved"] = resolved;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
}

struct Common {
    std::string out;
    std::string penalty = "indicator:1";
    double p = 2.0;
};

int run(const std::vector<std::string>& args);

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"adsens: sensitivities of adapted Wasserstein robust values"};
    app.require_subcommand(1);
    int status = 0;

    // --- sens ---------------------------------------------------------------
    auto* sens = app.add_subcommand("sens", "compute a sensitivity report");
    sens->require_subcommand(1);

    struct DiscreteArgs {
        Common c;
        std::string model, payoff, backend = "auto", basis = "poly:3:state,runmean", malliavin = "auto";
        bool mart = false, richardson = false, dump_field = false;
        double eps = 0.0;
        std::size_t paths = 100000;
        std::uint64_t seed = 1;
        int bootstrap = 200;
    } da;
    auto* disc = sens->add_subcommand("discrete", "Upsilon / Upsilon_Mart in discrete time");
    disc->add_option("--model", da.model, "walk:N=..,jump=..,pup=.. | lattice:<file> | brownian:T=..,N=..,M=..,seed=..")
        ->required();
    disc->add_option("--payoff", da.payoff, "payoff spec, e.g. asian:K=0")->required();
    disc->add_option("--p", da.c.p, "cost exponent p > 1");
    disc->add_option("--penalty", da.c.penalty, "indicator:<rho> | power:m=..,kappa=.. | table:<file>");
    disc->add_flag("--mart", da.mart, "martingale-constrained sensitivity");
    disc->add_option("--backend", da.backend, "auto | exact | regression");
    disc->add_option("--basis", da.basis, "regression basis, e.g. poly:3:state,runmean");
    disc->add_option("--paths", da.paths, "sample size when a lattice is estimated by regression");
    disc->add_option("--seed", da.seed, "sampling seed for --backend regression on a lattice");
    disc->add_option("--malliavin", da.malliavin, "auto | analytic | bump");
    disc->add_option("--eps", da.eps, "bump size (default max(1e-5, 1e-7 |x|_inf))");
    disc->add_flag("--richardson", da.richardson, "Richardson-extrapolated bumps");
    disc->add_option("--bootstrap", da.bootstrap, "bootstrap resamples for Monte Carlo error bars");
    disc->add_flag("--dump-field", da.dump_field, "write the adversarial direction field");
    disc->add_option("--out", da.c.out, "output directory (default $ADSENS_OUT or ./adsens-out)");
    disc->callback([&] {
        const Model model = parse_model(da.model);
        const CostSpec spec(da.c.p);
        const Penalty penalty = Penalty::parse(da.c.penalty);
        const int dim = model.lattice ? model.lattice->dim() : model.ensemble->dim();
        const Payoff f = payoffs::parse(da.payoff, dim);
        std::optional<ReferenceModel> ref;
        if (da.backend != "auto" && da.backend != "exact" && da.backend != "regression") {
            throw ValidationError("unknown backend '" + da.backend + "'");
        }
        if (model.lattice && da.backend != "regression") {
            ref = ReferenceModel::exact(*model.lattice);
        } else if (model.lattice) {
            const bool mart = check_martingale(*model.lattice).ok;
            ref = ReferenceModel::monte_carlo(sample_lattice(*model.lattice, da.paths, da.seed), BasisSpec::parse(da.basis),
                                              mart);
        } else {
            if (da.backend == "exact") throw ValidationError("an ensemble has no exact backend");
            ref = ReferenceModel::monte_carlo(*model.ensemble, BasisSpec::parse(da.basis), true);
        }
        SensitivityOptions so;
        so.malliavin = parse_malliavin(da.malliavin, da.eps, da.richardson);
        so.bootstrap_resamples = da.bootstrap;
        so.keep_field = da.dump_field;
        const SensitivityReport report =
            da.mart ? upsilon_mart(*ref, f, spec, penalty, so) : upsilon(*ref, f, spec, penalty, so);
        const fs::path dir = output_dir(da.c.out);
        write_file(dir / "report.json", to_json(report) + "\n");
        std::ostringstream csv;
        write_per_time_csv(csv, report, ref->grid());
        write_file(dir / "per_time_contribution.csv", csv.str());
        if (report.adversarial_field) {
            std::ostringstream field;
            write_field_csv(field, *report.adversarial_field);
            write_file(dir / "adversarial_field.csv", field.str());
        }
        json resolved;
        resolved["command"] = "sens discrete";
        resolved["model"] = model.resolved;
        resolved["payoff"] = f.name;
        resolved["p"] = da.c.p;
        resolved["penalty"] = penalty.describe();
        resolved["mart"] = da.mart;
        resolved["backend"] = report.diagnostics.backend;
        resolved["malliavin"] = report.diagnostics.malliavin;
        resolved["seed"] = model.ensemble ? model.ensemble->seed() : da.seed;
        resolved["bootstrap_seed"] = so.bootstrap_seed;
        write_manifest(dir, args, resolved);
        std::cout << to_json(report) << "\n";
    });

    struct HyperbolicArgs {
        Common c;
        std::string model = "brownian:T=1,N=64,M=20000,seed=1", payoff, basis = "poly:3:state,runmean";
        int bootstrap = 200;
        bool no_refine = false;
    } ha;
    auto* hyp = sens->add_subcommand("hyperbolic", "continuous-time Upsilon under hyperbolic scaling");
    hyp->add_option("--model", ha.model, "brownian:T=..,N=..,M=..,seed=..");
    hyp->add_option("--payoff", ha.payoff, "payoff spec, e.g. merton:lambda=0.5")->required();
    hyp->add_option("--p", ha.c.p, "cost exponent p > 1");
    hyp->add_option("--penalty", ha.c.penalty, "penalty spec");
    hyp->add_option("--basis", ha.basis, "regression basis");
    hyp->add_option("--bootstrap", ha.bootstrap, "bootstrap resamples");
    hyp->add_flag("--no-refinement", ha.no_refine, "skip the coarse-grid comparison");
    hyp->add_option("--out", ha.c.out, "output directory");
    hyp->callback([&] {
        const Model model = parse_model(ha.model);
        if (!model.ensemble) throw ValidationError("hyperbolic estimator needs a brownian ensemble model");
        const double horizon = model.ensemble->grid().horizon();
        const CostSpec spec(ha.c.p, Scaling::hyperbolic, horizon);
        const Penalty penalty = Penalty::parse(ha.c.penalty);
        const Payoff f = payoffs::parse(ha.payoff, model.ensemble->dim());
        ContinuousOptions options;
        options.basis = BasisSpec::parse(ha.basis);
        options.bootstrap_resamples = ha.bootstrap;
        options.refinement_check = !ha.no_refine;
        const SensitivityReport report = upsilon_hyperbolic(*model.ensemble, f, spec, penalty, options);
        const fs::path dir = output_dir(ha.c.out);
        write_file(dir / "report.json", to_json(report) + "\n");
        std::ostringstream csv;
        write_per_time_csv(csv, report, model.ensemble->grid());
        write_file(dir / "per_time_contribution.csv", csv.str());
        json resolved;
        resolved["command"] = "sens hyperbolic";
        resolved["model"] = model.resolved;
        resolved["payoff"] = f.name;
        resolved["p"] = ha.c.p;
        resolved["penalty"] = penalty.describe();
        resolved["basis"] = options.basis.describe();
        resolved["seed"] = model.ensemble->seed();
        write_manifest(dir, args, resolved);
        std::cout << to_json(report) << "\n";
    });

    struct ParabolicArgs {
        Common c;
        std::string model = "brownian:T=1,N=64,M=20000,seed=1", sigma = "const:0.2", utility = "quad",
                    basis = "poly:3:state,runmean";
        int bootstrap = 200;
    } pa;
    auto* par = sens->add_subcommand("parabolic", "continuous-time Upsilon_Mart under parabolic scaling");
    par->add_option("--model", pa.model, "brownian:T=..,N=..,M=..,seed=.. (d = 1)");
    par->add_option("--sigma", pa.sigma, "const:<c> | tanh:a=..,b=..");
    par->add_option("--utility", pa.utility, "linear | quad | quad:alpha=.. | logcosh");
    par->add_option("--penalty", pa.c.penalty, "penalty spec");
    par->add_option("--basis", pa.basis, "regression basis");
    par->add_option("--bootstrap", pa.bootstrap, "bootstrap resamples");
    par->add_option("--out", pa.c.out, "output directory");
    par->callback([&] {
        const Model model = parse_model(pa.model);
        if (!model.ensemble) throw ValidationError("parabolic estimator needs a brownian ensemble model");
        const SigmaSpec sigma = SigmaSpec::parse(pa.sigma);
        const UtilitySpec utility = UtilitySpec::parse(pa.utility);
        const Penalty penalty = Penalty::parse(pa.c.penalty);
        ContinuousOptions options;
        options.basis = BasisSpec::parse(pa.basis);
        options.bootstrap_resamples = pa.bootstrap;
        const SensitivityReport report = upsilon_mart_parabolic(*model.ensemble, sigma, utility, penalty, options);
        const fs::path dir = output_dir(pa.c.out);
        write_file(dir / "report.json", to_json(report) + "\n");
        std::ostringstream csv;
        csv << "k,s,dt,phi_sq_mean\n";
        const TimeGrid& grid = model.ensemble->grid();
        for (int k = 1; k <= grid.steps(); ++k) {
            const double c = report.per_time_contribution[static_cast<std::size_t>(k - 1)];
            csv << k << ',' << format_sig(grid[k - 1]) << ',' << format_sig(grid.dt(k)) << ','
                << format_sig(c / grid.dt(k)) << '\n';
        }
        write_file(dir / "phi_norm.csv", csv.str());
        json resolved;
        resolved["command"] = "sens parabolic";
        resolved["model"] = model.resolved;
        resolved["sigma"] = sigma.name;
        resolved["utility"] = utility.name;
        resolved["penalty"] = penalty.describe();
        resolved["basis"] = options.basis.describe();
        resolved["seed"] = model.ensemble->seed();
        write_manifest(dir, args, resolved);
        std::cout << to_json(report) << "\n";
    });

    // --- repro --------------------------------------------------------------
    struct ReproArgs {
        std::string target, out;
        ReproSetup setup;
        int steps = 10;
    } ra;
    auto* repro = app.add_subcommand("repro", "reproduce a published example");
    repro->add_option("target", ra.target, "asian-figure | merton | logcontract | quadvar")
        ->required()
        ->check(CLI::IsMember({"asian-figure", "merton", "logcontract", "quadvar"}));
    repro->add_option("--walk-steps", ra.steps, "walk length for asian-figure");
    repro->add_option("--paths", ra.setup.paths, "Monte Carlo sample size");
    repro->add_option("--steps", ra.setup.steps, "time steps of the Brownian grid");
    repro->add_option("--horizon", ra.setup.horizon, "T");
    repro->add_option("--seed", ra.setup.seed, "sampling seed");
    repro->add_option("--out", ra.out, "output directory");
    repro->callback([&] {
        const fs::path dir = output_dir(ra.out);
        json resolved;
        resolved["command"] = "repro " + ra.target;
        if (ra.target == "asian-figure") {
            const auto rows = asian_figure(ra.steps, 21);
            std::ostringstream csv;
            write_asian_csv(csv, rows);
            write_file(dir / "asian_figure.csv", csv.str());
            std::cout << csv.str();
            bool ok = true;
            for (const auto& r : rows) {
                if (!r.dominates()) {
                    ok = false;
                    std::cerr << "dominance fails at K=" << format_sig(r.strike) << "\n";
                }
            }
            resolved["walk_steps"] = ra.steps;
            resolved["strikes"] = 21;
            resolved["dominance"] = ok;
            write_manifest(dir, args, resolved);
            if (!ok) status = kExitFailedCheck;
            return;
        }
        ReproResult r;
        if (ra.target == "merton") r = repro_merton(0.5, ra.setup);
        else if (ra.target == "logcontract") r = repro_logcontract(0.2, ra.setup);
        else r = repro_quadvar(ra.setup);
        std::ostringstream csv;
        csv << "target,computed,closed_form,rel_error,tolerance,standard_error,pass\n"
            << r.target << ',' << format_sig(r.computed) << ',' << format_sig(r.closed_form) << ','
            << format_sig(r.rel_error) << ',' << format_sig(r.tolerance) << ',' << format_sig(r.standard_error) << ','
            << (r.pass ? "PASS" : "FAIL") << '\n';
        write_file(dir / (ra.target + ".csv"), csv.str());
        std::cout << csv.str();
        resolved["horizon"] = ra.setup.horizon;
        resolved["steps"] = ra.setup.steps;
        resolved["paths"] = ra.setup.paths;
        resolved["seed"] = ra.setup.seed;
        write_manifest(dir, args, resolved);
        if (!r.pass) status = kExitFailedCheck;
    });

    // --- oracle -------------------------------------------------------------
    struct OracleArgs {
        Common c;
        std::string model, payoff, deltas = "0.1,0.05,0.025,0.0125";
        bool mart = false;
        OracleOptions options;
    } oa;
    auto* oracle = app.add_subcommand("oracle", "brute-force verification");
    oracle->require_subcommand(1);
    auto* check = oracle->add_subcommand("check", "fit the slope of V(delta) and compare with Upsilon");
    check->add_option("--model", oa.model, "walk:.. | lattice:<file> (at most 1000 nodes)")->required();
    check->add_option("--payoff", oa.payoff, "payoff spec")->required();
    check->add_option("--p", oa.c.p, "cost exponent p > 1");
    check->add_option("--penalty", oa.c.penalty, "penalty spec");
    check->add_option("--deltas", oa.deltas, "comma-separated delta ladder");
    check->add_flag("--mart", oa.mart, "martingale-constrained perturbations");
    check->add_option("--starts", oa.options.random_starts, "random multistarts");
    check->add_option("--seed", oa.options.seed, "multistart seed");
    check->add_option("--out", oa.c.out, "output directory");
    check->callback([&] {
        const Model model = parse_model(oa.model);
        if (!model.lattice) throw ValidationError("the oracle needs a lattice model");
        const CostSpec spec(oa.c.p);
        const Penalty penalty = Penalty::parse(oa.c.penalty);
        const Payoff f = payoffs::parse(oa.payoff, model.lattice->dim());
        const SlopeCheck r = slope_check(*model.lattice, f, spec, penalty, parse_number_list(oa.deltas), oa.mart,
                                         oa.options);
        std::ostringstream csv;
        csv << "delta,value,increment\n";
        for (const auto& pt : r.ladder) {
            csv << format_sig(pt.delta) << ',' << format_sig(pt.value) << ',' << format_sig(pt.increment) << '\n';
        }
        const fs::path dir = output_dir(oa.c.out);
        write_file(dir / "oracle_ladder.csv", csv.str());
        std::cout << csv.str() << "slope," << format_sig(r.slope) << "\n"
                  << (oa.mart ? "upsilon_mart," : "upsilon,") << format_sig(r.reference) << "\n"
                  << "rel_error," << format_sig(r.rel_error) << "\n"
                  << (r.monotone ? "" : "warning,non-monotone ladder (ascent failure?)\n")
                  << (r.pass ? "PASS" : "FAIL") << "\n";
        json resolved;
        resolved["command"] = "oracle check";
        resolved["model"] = model.resolved;
        resolved["payoff"] = f.name;
        resolved["p"] = oa.c.p;
        resolved["penalty"] = penalty.describe();
        resolved["mart"] = oa.mart;
        resolved["deltas"] = oa.deltas;
        resolved["seed"] = oa.options.seed;
        resolved["starts"] = oa.options.random_starts;
        write_manifest(dir, args, resolved);
        if (!r.pass) status = kExitFailedCheck;
    });

    // --- rerun --------------------------------------------------------------
    std::string manifest_file, rerun_out;
    auto* rerun = app.add_subcommand("rerun", "repeat the run recorded in a manifest");
    rerun->add_option("manifest", manifest_file, "manifest.json written by an earlier run")->required();
    rerun->add_option("--out", rerun_out, "output directory (default: the manifest's)");
    rerun->callback([&] {
        std::ifstream in(manifest_file);
        if (!in) throw ValidationError("cannot open manifest '" + manifest_file + "'");
        json m;
        try {
            m = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("malformed manifest: ") + e.what());
        }
        std::vector<std::string> replay = m.at("argv").get<std::vector<std::string>>();
        if (!rerun_out.empty()) {
            for (std::size_t k = 0; k < replay.size(); ++k) {
                if (replay[k] == "--out" && k + 1 < replay.size()) replay.erase(replay.begin() + k, replay.begin() + k + 2);
            }
            replay.push_back("--out");
            replay.push_back(rerun_out);
        }
        status = run(replay);
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    return status;
}

int run(const std::vector<std::string>& args) {
    try {
        return run_cli(args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}
