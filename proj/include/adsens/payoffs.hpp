#pragma once

#include <string>
#include <vector>

#include "adsens/malliavin.hpp"
#include "adsens/sigma.hpp"

namespace adsens::payoffs {

/// <a, x_N>; D_n f = a for every n.
Payoff linear(std::vector<double> a);

/// max(0, avg - K), avg = (1/(N+1)) sum_{n=0}^N x_n (d = 1). The gradient uses the
/// convention 1{avg >= K}; paths with avg == K are flagged through at_kink.
Payoff asian(double strike);

/// avg^2 / 2 (d = 1); smooth Asian-type functional.
Payoff asian_squared();

/// (1/2) sum_m |Delta x_m|^2, the discrete quadratic variation; D_n f = Delta x_n.
Payoff quadratic_variation();

/// c3 x_N^3 + c2 x_N^2 (d = 1).
Payoff cubic(double c3, double c2);

/// log(kappa) + (r + lambda^2 / 2) T + lambda x_N: log-utility of the Merton optimal wealth.
Payoff merton(double lambda, double rate, double kappa, double horizon);

/// U(H) with H = sum_k sigma(t_k, x_k)(x_{k+1} - x_k), the left-point Ito sum (d = 1).
Payoff ito_utility(SigmaSpec sigma, UtilitySpec utility);

/// (1/2) H^2: the log-contract price functional -log(S_T / S_0) in expectation.
Payoff log_contract(SigmaSpec sigma);

/// Arithmetic expression in x0..xN (x3_2 = component 2 of x_3), avg, N, T and the functions
/// exp log sin cos tanh sqrt abs pos max min. No analytic gradient (bump backend).
Payoff expression(const std::string& source);

/// Builds a payoff from a CLI string: `linear:a=1;2`, `asian:K=0`, `asian_sq`, `quad_var`,
/// `cubic:c3=1,c2=0.1`, `merton:lambda=0.5,r=0,kappa=1,T=1`, `log_contract:c=0.2` or
/// `log_contract:a=0.2,b=0.05`, `expr:<file>`.
Payoff parse(const std::string& spec, int dim = 1);

}  // namespace adsens::payoffs
