#include "esgval/binomial_engine.hpp"

#include <algorithm>
#include <cmath>

namespace esgval {

namespace {

void check_step_inputs(double p, double sigma, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::Domain, "dt must be positive");
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::Domain, "p must lie strictly inside (0,1)");
  if (!(sigma > 0.0)) throw Error(ErrorCode::Domain, "sigma must be positive");
}

double payoff_value(PayoffKind kind, double s, double strike) {
  const double intrinsic = kind == PayoffKind::EuropeanCall ? s - strike : strike - s;
  return std::max(intrinsic, 0.0);
}

}  // namespace

StepMoves moves_arithmetic(const ModelParams& params, double rf, double dt) {
  check_step_inputs(params.p, params.sigma, dt);
  const double pu = std::sqrt((1.0 - params.p) / params.p);
  const double pd = std::sqrt(params.p / (1.0 - params.p));
  const double sdt = std::sqrt(dt);

  StepMoves m;
  m.p = params.p;
  m.u = params.mu * dt + params.sigma * pu * sdt;
  m.d = params.mu * dt - params.sigma * pd * sdt;
  m.q = (rf * dt - m.d) / (m.u - m.d);
  return m;
}

StepMoves moves_log(const ModelParams& params, double rf, double dt) {
  return moves_log_general(params.mu, params.sigma, params.sigma, params.p, rf,
                           dt);
}

StepMoves moves_log_general(double mu, double sigma_convexity,
                            double sigma_diffusion, double p, double rf,
                            double dt) {
  check_step_inputs(p, sigma_diffusion, dt);
  if (!(sigma_convexity >= 0.0))
    throw Error(ErrorCode::Domain, "convexity volatility must be nonnegative");
  const double pu = std::sqrt((1.0 - p) / p);
  const double pd = std::sqrt(p / (1.0 - p));
  const double sdt = std::sqrt(dt);
  const double half_var = 0.5 * sigma_convexity * sigma_convexity;

  StepMoves m;
  m.p = p;
  m.u = (mu - half_var * pu * pu) * dt + sigma_diffusion * pu * sdt;
  m.d = (mu - half_var * pd * pd) * dt - sigma_diffusion * pd * sdt;
  m.q = (std::exp(rf * dt) - std::exp(m.d)) / (std::exp(m.u) - std::exp(m.d));
  return m;
}

StepMoves moves_log_return(double mu_r, double sigma_r, double p, double rf,
                           double dt) {
  check_step_inputs(p, sigma_r, dt);
  const double pu = std::sqrt((1.0 - p) / p);
  const double pd = std::sqrt(p / (1.0 - p));
  const double sdt = std::sqrt(dt);

  StepMoves m;
  m.p = p;
  m.u = mu_r * dt + sigma_r * pu * sdt;
  m.d = mu_r * dt - sigma_r * pd * sdt;
  m.q = (std::exp(rf * dt) - std::exp(m.d)) / (std::exp(m.u) - std::exp(m.d));
  return m;
}

bool check_no_arbitrage(const StepMoves& moves, double rf, double dt) {
  return 1.0 + moves.d > 0.0 && moves.d < rf * dt && rf * dt < moves.u;
}

double sharpe_theta(const ModelParams& params, double rf) {
  if (!(params.sigma > 0.0))
    throw Error(ErrorCode::Domain, "sigma must be positive");
  const double drift = params.convention == Convention::Log
                           ? params.mu - 0.5 * params.sigma * params.sigma
                           : params.mu;
  return (drift - rf) / params.sigma;
}

double esg_dividend_yield(const ModelParams& at_lambda,
                          const ModelParams& at_zero, double rf) {
  if (at_lambda.convention != at_zero.convention)
    throw Error(ErrorCode::InvalidArgument,
                "dividend yield needs one convention for both parameter sets");
  return at_zero.sigma * (sharpe_theta(at_lambda, rf) - sharpe_theta(at_zero, rf));
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bsm_call(double s0, double strike, double rf, double sigma, double t) {
  if (!(s0 > 0.0)) throw Error(ErrorCode::Domain, "spot must be positive");
  if (strike < 0.0) throw Error(ErrorCode::Domain, "strike must be nonnegative");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::Domain, "sigma must be nonnegative");
  if (!(t >= 0.0)) throw Error(ErrorCode::Domain, "maturity must be nonnegative");

  const double disc = std::exp(-rf * t);
  if (strike == 0.0) return s0;
  const double vol = sigma * std::sqrt(t);
  if (vol < 1e-12) return std::max(s0 - strike * disc, 0.0);

  const double d1 = (std::log(s0 / strike) + (rf + 0.5 * sigma * sigma) * t) / vol;
  const double d2 = d1 - vol;
  return s0 * norm_cdf(d1) - strike * disc * norm_cdf(d2);
}

PricingResult price_lattice(const LatticeSpec& spec,
                            const std::vector<StepMoves>& per_step,
                            Convention convention) {
  const int n = spec.steps;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "steps must be at least 1");
  if (per_step.size() != std::size_t(n))
    throw Error(ErrorCode::InvalidArgument, "need one move family per step");
  if (!(spec.s0 > 0.0)) throw Error(ErrorCode::Domain, "spot must be positive");
  if (!spec.uniform())
    throw Error(ErrorCode::InvalidArgument,
                "lattice pricing requires a uniform step length");

  PricingResult res;
  res.q_min = per_step[0].q;
  res.q_max = per_step[0].q;

  // Terminal layer: node j carries j up-moves, applied at the earliest steps.
  // With identical moves at every step this ordering is immaterial and the
  // lattice is exact.
  std::vector<double> up(n), down(n);
  for (int k = 0; k < n; ++k) {
    const StepMoves& m = per_step[k];
    res.q_min = std::min(res.q_min, m.q);
    res.q_max = std::max(res.q_max, m.q);
    if (convention == Convention::Arithmetic) {
      up[k] = 1.0 + m.u;
      down[k] = 1.0 + m.d;
      if (!(up[k] > 0.0 && down[k] > 0.0))
        throw Error(ErrorCode::Domain, "gross return factors must stay positive");
    } else {
      up[k] = std::exp(m.u);
      down[k] = std::exp(m.d);
    }
  }
  res.arb_violation = res.q_min < 0.0 || res.q_max > 1.0;

  std::vector<double> value(std::size_t(n) + 1);
  double s = spec.s0;
  for (int k = 0; k < n; ++k) s *= down[k];
  value[0] = payoff_value(spec.payoff, s, spec.strike);
  for (int j = 1; j <= n; ++j) {
    s *= up[j - 1] / down[j - 1];
    value[j] = payoff_value(spec.payoff, s, spec.strike);
  }

  for (int k = n; k >= 1; --k) {
    const StepMoves& m = per_step[k - 1];
    const double disc = convention == Convention::Arithmetic
                            ? 1.0 / (1.0 + spec.rf * spec.dt)
                            : std::exp(-spec.rf * spec.dt);
    for (int j = 0; j < k; ++j)
      value[j] = disc * (m.q * value[j + 1] + (1.0 - m.q) * value[j]);
  }

  res.price = value[0];
  if (!std::isfinite(res.price))
    throw Error(ErrorCode::Numeric, "lattice produced a non-finite price");
  return res;
}

PricingResult price_path_recursion(const LatticeSpec& spec,
                                   const std::vector<StepMoves>& per_step,
                                   Convention convention, int depth_cap) {
  const int n = spec.steps;
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "steps must be at least 1");
  if (per_step.size() != std::size_t(n))
    throw Error(ErrorCode::InvalidArgument, "need one move family per step");
  if (n > depth_cap)
    throw Error(ErrorCode::InvalidArgument,
                "path recursion depth exceeds the configured cap");
  if (!(spec.s0 > 0.0)) throw Error(ErrorCode::Domain, "spot must be positive");

  std::vector<double> dt(n, spec.dt), rf(n, spec.rf);
  if (!spec.dt_steps.empty()) {
    if (spec.dt_steps.size() != std::size_t(n))
      throw Error(ErrorCode::InvalidArgument, "need one dt per step");
    dt = spec.dt_steps;
  }
  if (!spec.rf_steps.empty()) {
    if (spec.rf_steps.size() != std::size_t(n))
      throw Error(ErrorCode::InvalidArgument, "need one rf per step");
    rf = spec.rf_steps;
  }

  PricingResult res;
  res.q_min = per_step[0].q;
  res.q_max = per_step[0].q;
  for (const StepMoves& m : per_step) {
    res.q_min = std::min(res.q_min, m.q);
    res.q_max = std::max(res.q_max, m.q);
  }
  res.arb_violation = res.q_min < 0.0 || res.q_max > 1.0;

  struct Frame {
    const LatticeSpec& spec;
    const std::vector<StepMoves>& moves;
    const std::vector<double>& dt;
    const std::vector<double>& rf;
    Convention conv;

    double walk(int k, double s) const {
      if (k == spec.steps) return payoff_value(spec.payoff, s, spec.strike);
      const StepMoves& m = moves[k];
      double su, sd, disc;
      if (conv == Convention::Arithmetic) {
        su = s * (1.0 + m.u);
        sd = s * (1.0 + m.d);
        disc = 1.0 / (1.0 + rf[k] * dt[k]);
        if (!(su > 0.0 && sd > 0.0))
          throw Error(ErrorCode::Domain, "gross return factors must stay positive");
      } else {
        su = s * std::exp(m.u);
        sd = s * std::exp(m.d);
        disc = std::exp(-rf[k] * dt[k]);
      }
      return disc * (m.q * walk(k + 1, su) + (1.0 - m.q) * walk(k + 1, sd));
    }
  };

  Frame frame{spec, per_step, dt, rf, convention};
  res.price = frame.walk(0, spec.s0);
  if (!std::isfinite(res.price))
    throw Error(ErrorCode::Numeric, "path recursion produced a non-finite price");
  return res;
}

PricingResult price_european(const LatticeSpec& spec, const ModelParams& params,
                             int depth_cap) {
  if (spec.uniform()) {
    const StepMoves m = params.convention == Convention::Arithmetic
                            ? moves_arithmetic(params, spec.rf, spec.dt)
                            : moves_log(params, spec.rf, spec.dt);
    return price_lattice(spec, std::vector<StepMoves>(std::size_t(spec.steps), m),
                         params.convention);
  }

  std::vector<StepMoves> per_step;
  per_step.reserve(std::size_t(spec.steps));
  for (int k = 0; k < spec.steps; ++k) {
    const double dt = spec.dt_steps.empty() ? spec.dt : spec.dt_steps[std::size_t(k)];
    const double rf = spec.rf_steps.empty() ? spec.rf : spec.rf_steps[std::size_t(k)];
    per_step.push_back(params.convention == Convention::Arithmetic
                           ? moves_arithmetic(params, rf, dt)
                           : moves_log(params, rf, dt));
  }
  return price_path_recursion(spec, per_step, params.convention, depth_cap);
}

}  // namespace esgval
