#pragma once

#include <cstdint>

#include "esgval/types.hpp"

namespace esgval {

// Probability that a trader with information intensity delta calls the next
// move correctly: (1 + delta*sqrt(dt))/2. Requires 0 <= delta < 1/sqrt(dt).
double informed_p_correct(double delta, double dt);

// Information coefficient entering the arithmetic strategy moments:
// n_delta = 2*delta*sqrt(p*(1-p)).
double n_delta_arith(double delta, double p);

// Position size maximizing the arithmetic strategy Sharpe ratio, n_delta/theta.
// |theta| below theta_floor is a singular, no-information configuration.
double optimal_n_arith(double n_delta, double theta, double theta_floor = 1e-8);

// Sharpe ratio of the arithmetic strategy at position n:
// (theta + n_delta*n)/sqrt(1+n^2). Its maximum over n is sqrt(theta^2+n_delta^2).
double informed_sharpe_arith(double n, double n_delta, double theta);

// Log-strategy Sharpe ratio at position n, up to the constant factor sigma/2:
// (a + 2*n_e*n - n^2)/sqrt(1+n^2).
double informed_sharpe_log_scaled(double n, double n_e, double a);

// Stationary points of the log-strategy Sharpe ratio solve the depressed cubic
// n^3 + (2+a)*n - 2*n_e = 0. Returns the real root maximizing the Sharpe
// ratio: the single real root via Cardano when the discriminant is positive,
// otherwise the best of the three trigonometric roots. Roots are polished by
// Newton steps.
double optimal_n_log(double n_e, double a);

// Inputs and derived quantities of the log-convention informed tree.
// sigma1 can lose reality for extreme positions; sigma1_valid flags that.
struct InformedLogParams {
  double theta = 0.0;   // (mu - sigma^2/2 - rf)/sigma
  double n_e = 0.0;     // 2*delta*sqrt(p*(1-p))/sigma
  double a = 0.0;       // 2*(mu - rf)/sigma^2 - 1
  double n = 0.0;       // Sharpe-maximizing position
  double sigma1 = 0.0;  // sigma*sqrt(1 + n^2 - 2*n_e*n)
  double sigma2 = 0.0;  // sigma*sqrt(1 + n^2), never below sigma
  bool sigma1_valid = true;
};

InformedLogParams informed_log_params(const ModelParams& params, double delta,
                                      double rf, double dt);

// Replicating one-step tree of the optimally informed arithmetic trader:
// drift mu + sigma*n_delta^2/theta, volatility sigma*sqrt(1+(n_delta/theta)^2).
// Reduces exactly to moves_arithmetic at delta = 0.
StepMoves informed_moves_arith(const ModelParams& params, double delta,
                               double rf, double dt, double theta_floor = 1e-8);

// Log-convention informed tree: convexity adjustments use sigma1, diffusion
// terms use sigma2. Reduces exactly to moves_log at delta = 0 (single-root
// regime). A negative sigma1^2 argument is a flagged domain error.
StepMoves informed_moves_log(const ModelParams& params, double delta, double rf,
                             double dt);

// Extra yield the informed trader extracts, per unit time.
// Arithmetic: sigma*(sqrt(theta^2+n_delta^2) - theta).
// Log: sigma*(sqrt(1+n^2)*(theta + sigma*(n^2-1)/2) - theta) with
// theta = (mu-rf)/sigma, which at delta = 0 evaluates to -sigma^2/2 rather
// than zero; the formula is kept in that published form.
double informed_dividend_yield(const ModelParams& params, double delta,
                               double rf, double dt);

struct StrategyMoments {
  double mean = 0.0;
  double var = 0.0;
  std::int64_t paths = 0;
};

// Seeded Monte-Carlo of the one-step four-branch strategy (direction times
// correctness) holding n_contracts. Returns sample mean and variance of the
// one-step strategy return in the series convention of params.
StrategyMoments simulate_informed_strategy(const ModelParams& params,
                                           double delta, double n_contracts,
                                           double rf, double dt,
                                           std::int64_t paths,
                                           std::uint64_t seed);

}  // namespace esgval
