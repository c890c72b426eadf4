#pragma once

// Reproduction targets: the Asian-option sensitivity comparison and the closed-form
// continuous-time examples.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsens/lattice.hpp"

namespace adsens {

struct AsianFigureRow {
    double strike = 0.0;
    double upsilon_mart = 0.0;
    /// d/dj E[max(0, j avg - K)] at j = 1, per unit of adapted distance of x -> j x (sqrt N).
    double parametric = 0.0;
    /// d/dj E[max(0, j avg - K)] at j = 1 = E[avg 1{avg >= K}].
    double parametric_jump_derivative = 0.0;

    bool dominates() const { return upsilon_mart >= parametric; }
};

/// K_i = min avg + (i + 1/2) h, h = (max avg - min avg) / (count - 1), i = 0..count-1.
std::vector<double> asian_strike_grid(const PathEnumeration& enumeration, int count);

/// Exact enumeration on the symmetric +-1 walk with p = 2 and the indicator(1) penalty.
std::vector<AsianFigureRow> asian_figure(int steps = 10, int strikes = 21);

/// CSV `K,upsilon_mart,parametric,parametric_jump_derivative`.
void write_asian_csv(std::ostream& out, const std::vector<AsianFigureRow>& rows);

struct ReproResult {
    std::string target;
    double computed = 0.0;
    double closed_form = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    /// Bootstrap standard error of the computed value.
    double standard_error = 0.0;
    bool pass = false;
};

struct ReproSetup {
    double horizon = 1.0;
    int steps = 64;
    std::size_t paths = 100000;
    std::uint64_t seed = 20240601;
    int bootstrap_resamples = 200;
};

/// Hyperbolic Upsilon of the Merton log-utility payoff against lambda sqrt(T) (1 % tolerance).
ReproResult repro_merton(double lambda = 0.5, const ReproSetup& setup = {});
/// Parabolic Upsilon_Mart of the log contract with constant sigma against sigma^2 sqrt(T) (2 %).
ReproResult repro_logcontract(double sigma = 0.2, const ReproSetup& setup = {});
/// Parabolic Upsilon_Mart of (1/2)[X]_T (sigma = 1, U = x^2/2) against sqrt(T) (1 %).
ReproResult repro_quadvar(const ReproSetup& setup = {});

}  // namespace adsens
