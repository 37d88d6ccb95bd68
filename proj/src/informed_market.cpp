#include "esgval/informed_market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "esgval/binomial_engine.hpp"

namespace esgval {

namespace {

void require_convention(const ModelParams& params, Convention expected,
                        const char* what) {
  if (params.convention != expected)
    throw Error(ErrorCode::InvalidArgument, what);
}

void check_delta(double delta, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::Domain, "dt must be positive");
  if (!(delta >= 0.0) || !(delta * std::sqrt(dt) < 1.0))
    throw Error(ErrorCode::Domain,
                "information intensity must lie in [0, 1/sqrt(dt))");
}

double cubic_residual(double n, double coeff_lin, double rhs) {
  return (n * n + coeff_lin) * n - rhs;
}

// One or two Newton polish steps on n^3 + coeff_lin*n - rhs.
double newton_polish(double n, double coeff_lin, double rhs) {
  for (int it = 0; it < 2; ++it) {
    const double f = cubic_residual(n, coeff_lin, rhs);
    const double fp = 3.0 * n * n + coeff_lin;
    if (fp == 0.0) break;
    const double step = f / fp;
    if (!std::isfinite(step)) break;
    n -= step;
  }
  return n;
}

}  // namespace

double informed_p_correct(double delta, double dt) {
  check_delta(delta, dt);
  return 0.5 * (1.0 + delta * std::sqrt(dt));
}

double n_delta_arith(double delta, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::Domain, "p must lie strictly inside (0,1)");
  if (!(delta >= 0.0))
    throw Error(ErrorCode::Domain, "information intensity must be nonnegative");
  return 2.0 * delta * std::sqrt(p * (1.0 - p));
}

double optimal_n_arith(double n_delta, double theta, double theta_floor) {
  if (std::abs(theta) < theta_floor)
    throw Error(ErrorCode::Singular,
                "Sharpe ratio below floor, no-information configuration");
  return n_delta / theta;
}

double informed_sharpe_arith(double n, double n_delta, double theta) {
  return (theta + n_delta * n) / std::sqrt(1.0 + n * n);
}

double informed_sharpe_log_scaled(double n, double n_e, double a) {
  return (a + 2.0 * n_e * n - n * n) / std::sqrt(1.0 + n * n);
}

double optimal_n_log(double n_e, double a) {
  if (!std::isfinite(n_e) || !std::isfinite(a))
    throw Error(ErrorCode::Domain, "cubic inputs must be finite");

  // n^3 + A*n - 2*n_e = 0 in depressed form t^3 + P*t + Q with
  // P = A, Q = -2*n_e. Discriminant (Q/2)^2 + (P/3)^3 = n_e^2 + (A/3)^3.
  const double A = 2.0 + a;
  const double rhs = 2.0 * n_e;
  const double disc = n_e * n_e + std::pow(A / 3.0, 3);

  double candidates[3];
  int count = 0;
  if (disc >= 0.0) {
    const double b = std::sqrt(disc);
    candidates[count++] = std::cbrt(n_e + b) + std::cbrt(n_e - b);
  } else {
    // Three real roots: 2*sqrt(-A/3)*cos(phi/3 - 2*pi*k/3) with
    // cos(phi) = n_e / sqrt(-(A/3)^3).
    const double radius = 2.0 * std::sqrt(-A / 3.0);
    const double arg = std::clamp(n_e / std::sqrt(-std::pow(A / 3.0, 3)), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    constexpr double two_thirds_pi = 2.0943951023931953;
    for (int k = 0; k < 3; ++k)
      candidates[count++] = radius * std::cos(phi - two_thirds_pi * double(k));
  }

  double best = 0.0;
  double best_sharpe = 0.0;
  for (int i = 0; i < count; ++i) {
    const double n = newton_polish(candidates[i], A, rhs);
    const double s = informed_sharpe_log_scaled(n, n_e, a);
    if (i == 0 || s > best_sharpe) {
      best = n;
      best_sharpe = s;
    }
  }
  return best;
}

InformedLogParams informed_log_params(const ModelParams& params, double delta,
                                      double rf, double dt) {
  require_convention(params, Convention::Log,
                     "informed log tree needs log-convention parameters");
  check_delta(delta, dt);
  if (!(params.sigma > 0.0))
    throw Error(ErrorCode::Domain, "sigma must be positive");
  if (!(params.p > 0.0 && params.p < 1.0))
    throw Error(ErrorCode::Domain, "p must lie strictly inside (0,1)");

  InformedLogParams out;
  out.theta = sharpe_theta(params, rf);
  out.n_e = 2.0 * delta * std::sqrt(params.p * (1.0 - params.p)) / params.sigma;
  out.a = 2.0 * (params.mu - rf) / (params.sigma * params.sigma) - 1.0;
  out.n = optimal_n_log(out.n_e, out.a);

  const double arg1 = 1.0 + out.n * out.n - 2.0 * out.n_e * out.n;
  out.sigma1_valid = arg1 >= 0.0;
  out.sigma1 = out.sigma1_valid ? params.sigma * std::sqrt(arg1)
                                : std::numeric_limits<double>::quiet_NaN();
  out.sigma2 = params.sigma * std::sqrt(1.0 + out.n * out.n);
  return out;
}

StepMoves informed_moves_arith(const ModelParams& params, double delta,
                               double rf, double dt, double theta_floor) {
  require_convention(params, Convention::Arithmetic,
                     "informed arithmetic tree needs arithmetic parameters");
  check_delta(delta, dt);
  if (!(params.sigma > 0.0))
    throw Error(ErrorCode::Domain, "sigma must be positive");

  const double theta = sharpe_theta(params, rf);
  if (std::abs(theta) < theta_floor)
    throw Error(ErrorCode::Singular,
                "Sharpe ratio below floor, no-information configuration");
  const double nd = n_delta_arith(delta, params.p);
  const double ratio = nd / theta;

  ModelParams replicating = params;
  replicating.mu = params.mu + params.sigma * (nd * nd / theta);
  replicating.sigma = params.sigma * std::sqrt(1.0 + ratio * ratio);
  return moves_arithmetic(replicating, rf, dt);
}

StepMoves informed_moves_log(const ModelParams& params, double delta, double rf,
                             double dt) {
  const InformedLogParams ip = informed_log_params(params, delta, rf, dt);
  if (!ip.sigma1_valid)
    throw Error(ErrorCode::Domain,
                "informed log volatility sigma1 loses reality at this position");
  return moves_log_general(params.mu, ip.sigma1, ip.sigma2, params.p, rf, dt);
}

double informed_dividend_yield(const ModelParams& params, double delta,
                               double rf, double dt) {
  check_delta(delta, dt);
  if (!(params.sigma > 0.0))
    throw Error(ErrorCode::Domain, "sigma must be positive");

  if (params.convention == Convention::Arithmetic) {
    const double theta = sharpe_theta(params, rf);
    const double nd = n_delta_arith(delta, params.p);
    return params.sigma * (std::sqrt(theta * theta + nd * nd) - theta);
  }

  const InformedLogParams ip = informed_log_params(params, delta, rf, dt);
  const double theta = (params.mu - rf) / params.sigma;
  const double opt = 0.5 * params.sigma * (ip.a + ip.n * ip.n) *
                     std::sqrt(1.0 + ip.n * ip.n);
  return params.sigma * (opt - theta);
}

StrategyMoments simulate_informed_strategy(const ModelParams& params,
                                           double delta, double n_contracts,
                                           double rf, double dt,
                                           std::int64_t paths,
                                           std::uint64_t seed) {
  if (paths < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two paths");
  if (!std::isfinite(n_contracts))
    throw Error(ErrorCode::Domain, "position size must be finite");
  const double p_corr = informed_p_correct(delta, dt);

  // Per-branch one-step strategy returns: direction (up/down) times
  // correctness of the trader's call.
  double r_uc, r_uw, r_dc, r_dw;
  if (params.convention == Convention::Arithmetic) {
    const StepMoves m = moves_arithmetic(params, rf, dt);
    const double eu = m.u - rf * dt;
    const double ed = m.d - rf * dt;
    r_uc = m.u + n_contracts * eu;
    r_uw = m.u - n_contracts * eu;
    r_dc = m.d - n_contracts * ed;
    r_dw = m.d + n_contracts * ed;
  } else {
    const StepMoves m = moves_log(params, rf, dt);
    const double gu = std::exp(m.u), gd = std::exp(m.d);
    const double bond = std::exp(rf * dt);
    const double au = gu + n_contracts * (gu - bond);
    const double awu = gu - n_contracts * (gu - bond);
    const double ad = gd - n_contracts * (gd - bond);
    const double awd = gd + n_contracts * (gd - bond);
    if (!(au > 0.0 && awu > 0.0 && ad > 0.0 && awd > 0.0))
      throw Error(ErrorCode::Numeric,
                  "log strategy return undefined: position wipes out the portfolio");
    r_uc = std::log(au);
    r_uw = std::log(awu);
    r_dc = std::log(ad);
    r_dw = std::log(awd);
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return double(rng() >> 11) * (1.0 / 9007199254740992.0);
  };

  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < paths; ++i) {
    const bool up = uniform() < params.p;
    const bool correct = uniform() < p_corr;
    const double r = up ? (correct ? r_uc : r_uw) : (correct ? r_dc : r_dw);
    const double d1 = r - mean;
    mean += d1 / double(i + 1);
    m2 += d1 * (r - mean);
  }

  StrategyMoments out;
  out.mean = mean;
  out.var = m2 / double(paths - 1);
  out.paths = paths;
  return out;
}

}  // namespace esgval
