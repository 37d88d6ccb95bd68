#pragma once

#include "esgval/types.hpp"

namespace esgval {

// Arithmetic-return moves: U = mu*dt + sigma*pu*sqrt(dt) and
// D = mu*dt - sigma*pd*sqrt(dt) with pu = sqrt((1-p)/p), pd = sqrt(p/(1-p)).
// q is the exact one-step martingale probability (rf*dt - D)/(U - D).
StepMoves moves_arithmetic(const ModelParams& params, double rf, double dt);

// Log-return moves in the price-drift form: the drift of each move carries its
// own convexity adjustment, U = (mu - 0.5*sigma^2*pu^2)*dt + sigma*pu*sqrt(dt)
// and symmetrically for D. The one-step mean log return is (mu - sigma^2/2)*dt
// for every p; the variance is sigma^2*dt exactly only at p = 1/2.
// q = (e^{rf*dt} - e^D)/(e^U - e^D).
StepMoves moves_log(const ModelParams& params, double rf, double dt);

// Log moves with separate volatilities for the convexity adjustment and the
// diffusion term; moves_log is the special case of equal volatilities.
StepMoves moves_log_general(double mu, double sigma_convexity,
                            double sigma_diffusion, double p, double rf,
                            double dt);

// Log-return moves parameterized directly by the per-step return mean mu_r and
// volatility sigma_r without convexity terms: U = mu_r*dt + sigma_r*pu*sqrt(dt),
// D = mu_r*dt - sigma_r*pd*sqrt(dt). Mean and variance of the one-step log
// return match mu_r*dt and sigma_r^2*dt exactly for every p.
StepMoves moves_log_return(double mu_r, double sigma_r, double p, double rf,
                           double dt);

// Discrete no-arbitrage condition on gross arithmetic returns:
// 0 < 1+d < 1+rf*dt < 1+u. When it holds for arithmetic moves, the arithmetic
// q lies in (0,1); the log-convention q has no such guarantee.
bool check_no_arbitrage(const StepMoves& moves, double rf, double dt);

// Sharpe ratio entering the risk-neutral shift: (mu - rf)/sigma for the
// arithmetic convention, (mu - sigma^2/2 - rf)/sigma for the log convention.
double sharpe_theta(const ModelParams& params, double rf);

// ESG-induced dividend yield sigma0*(theta_lambda - theta0). Both parameter
// sets must use the same convention.
double esg_dividend_yield(const ModelParams& at_lambda,
                          const ModelParams& at_zero, double rf);

double norm_cdf(double x);

// Black-Scholes-Merton European call. sigma and rf are per unit of t.
double bsm_call(double s0, double strike, double rf, double sigma, double t);

// European option price by backward induction on a recombining lattice with
// one move family per step. Exact when every step shares the same moves; with
// genuinely step-varying moves the lattice recombination is the usual
// per-level approximation. q outside [0,1] is flagged, never clamped.
PricingResult price_lattice(const LatticeSpec& spec,
                            const std::vector<StepMoves>& per_step,
                            Convention convention);

// Exact expectation over all 2^steps paths for step-varying moves; cost grows
// exponentially, so depth is capped.
PricingResult price_path_recursion(const LatticeSpec& spec,
                                   const std::vector<StepMoves>& per_step,
                                   Convention convention, int depth_cap = 26);

// European price under constant parameters. Uniform lattices price in
// O(steps^2); per-step dt/rf fall back to the exact path recursion and are
// subject to its depth cap.
PricingResult price_european(const LatticeSpec& spec, const ModelParams& params,
                             int depth_cap = 26);

}  // namespace esgval
