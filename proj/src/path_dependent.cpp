#include "esgval/path_dependent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "esgval/binomial_engine.hpp"

namespace esgval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_df(double df) {
  if (!(df > 0.0))
    throw Error(ErrorCode::Domain, "degrees of freedom must be positive");
}

// Regularized incomplete beta I_x(a,b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);

  auto cf = [](double aa, double bb, double xx) {
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (aa + bb) * xx / (aa + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      const double m2 = 2.0 * m;
      double num = m * (bb - m) * xx / ((aa + m2 - 1.0) * (aa + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(aa + m) * (aa + bb + m) * xx / ((aa + m2) * (aa + m2 + 1.0));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double delta = d * c;
      h *= delta;
      if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h;
  };

  // The continued fraction converges fast for x below (a+1)/(a+b+2); use the
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(log_front) * cf(a, b, x) / a;
  return 1.0 - std::exp(log_front) * cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_pdf(double x, double df) {
  check_df(df);
  const double pi = std::acos(-1.0);
  const double log_pdf = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                         0.5 * std::log(df * pi) -
                         0.5 * (df + 1.0) * std::log1p(x * x / df);
  return std::exp(log_pdf);
}

double student_t_cdf(double x, double df) {
  check_df(df);
  if (x == 0.0) return 0.5;
  const double two_sided = incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - 0.5 * two_sided : 0.5 * two_sided;
}

DriverSeries standardize_driver(const std::vector<double>& returns, double dt,
                                double p_clamp) {
  if (!(dt > 0.0)) throw Error(ErrorCode::Domain, "dt must be positive");
  if (returns.size() < 2)
    throw Error(ErrorCode::Degenerate, "driver needs at least two steps");

  const double mean =
      std::accumulate(returns.begin(), returns.end(), 0.0) / double(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double stdev = std::sqrt(ss / double(returns.size() - 1));
  if (stdev == 0.0)
    throw Error(ErrorCode::Degenerate, "driver return variance is zero");

  std::size_t up = 0;
  for (double r : returns)
    if (r - mean >= 0.0) ++up;
  const double p_m = std::clamp(double(up) / double(returns.size()), p_clamp,
                                1.0 - p_clamp);
  const double pu = std::sqrt((1.0 - p_m) / p_m);
  const double pd = std::sqrt(p_m / (1.0 - p_m));

  DriverSeries d;
  d.p_m = p_m;
  d.dt = dt;
  d.z.resize(returns.size());
  d.x.resize(returns.size() + 1);
  d.x[0] = 0.0;
  const double sdt = std::sqrt(dt);
  for (std::size_t k = 0; k < returns.size(); ++k) {
    d.z[k] = returns[k] - mean >= 0.0 ? pu : -pd;
    d.x[k + 1] = d.x[k] + sdt * d.z[k];
  }
  return d;
}

double eta_shape(const EtaCoeffs& coeffs, double x, double integral,
                 bool* floored) {
  const auto shape = [&coeffs](double v, double df) {
    return coeffs.shape == ShapeKind::Density ? student_t_pdf(v, df)
                                              : student_t_cdf(v, df);
  };
  double eta = coeffs.c1 + coeffs.c2 * shape(x, coeffs.df_h) +
               coeffs.c3 * shape(integral, coeffs.df_g);
  if (eta <= coeffs.eta_floor) {
    eta = coeffs.eta_floor;
    if (floored) *floored = true;
  }
  return eta;
}

EtaPath eta_path(const EtaCoeffs& coeffs, const DriverSeries& driver) {
  EtaPath path;
  path.values.resize(driver.z.size());
  double integral = 0.0;  // left-Riemann integral of X over earlier steps
  for (std::size_t k = 0; k < driver.z.size(); ++k) {
    if (k > 0) integral += driver.x[k - 1] * driver.dt;
    path.values[k] = eta_shape(coeffs, driver.x[k], integral, &path.floored);
  }
  return path;
}

StepMoves pd_moves(double mu_r, double eta_k, double p_m, double rf, double dt,
                   Convention convention) {
  if (convention == Convention::Arithmetic) {
    ModelParams p;
    p.mu = mu_r;
    p.sigma = eta_k;
    p.p = p_m;
    p.convention = Convention::Arithmetic;
    return moves_arithmetic(p, rf, dt);
  }
  return moves_log_return(mu_r, eta_k, p_m, rf, dt);
}

std::vector<double> pd_model_prices(double s0, double mu_r,
                                    const EtaCoeffs& coeffs,
                                    const DriverSeries& driver,
                                    Convention convention) {
  if (!(s0 > 0.0)) throw Error(ErrorCode::Domain, "starting value must be positive");
  const EtaPath etas = eta_path(coeffs, driver);
  const double sdt = std::sqrt(driver.dt);

  std::vector<double> prices(driver.z.size());
  double s = s0;
  for (std::size_t k = 0; k < driver.z.size(); ++k) {
    const double r = mu_r * driver.dt + etas.values[k] * driver.z[k] * sdt;
    if (convention == Convention::Arithmetic) {
      if (!(1.0 + r > 0.0))
        throw Error(ErrorCode::Domain,
                    "model return at or below -1 makes the price nonpositive");
      s *= 1.0 + r;
    } else {
      s *= std::exp(r);
    }
    if (!std::isfinite(s))
      throw Error(ErrorCode::Numeric, "model price path overflow");
    prices[k] = s;
  }
  return prices;
}

PricingResult pd_price_european(const LatticeSpec& spec, double mu_r,
                                const EtaCoeffs& coeffs,
                                const DriverSeries& driver,
                                Convention convention, int path_cap) {
  if (spec.steps < 1)
    throw Error(ErrorCode::InvalidArgument, "steps must be at least 1");
  if (!spec.uniform() || spec.dt != driver.dt)
    throw Error(ErrorCode::InvalidArgument,
                "path-dependent pricing needs the driver's uniform step length");
  if (driver.z.size() < std::size_t(spec.steps))
    throw Error(ErrorCode::InvalidArgument,
                "driver path shorter than the option's step count");

  const EtaPath etas = eta_path(coeffs, driver);
  std::vector<StepMoves> per_step(std::size_t(spec.steps));
  for (int k = 0; k < spec.steps; ++k)
    per_step[std::size_t(k)] = pd_moves(mu_r, etas.values[std::size_t(k)],
                                        driver.p_m, spec.rf, spec.dt, convention);

  if (spec.steps <= path_cap)
    return price_path_recursion(spec, per_step, convention, path_cap);
  return price_lattice(spec, per_step, convention);
}

namespace {

// Nelder-Mead on 3 coefficients. Deterministic; returns best point found.
struct SimplexResult {
  std::array<double, 3> x;
  double f = kInf;
  int evals = 0;
};

SimplexResult nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                          std::array<double, 3> x0, double tol, int max_evals) {
  constexpr int dim = 3;
  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

  std::array<std::array<double, 3>, dim + 1> pts;
  std::array<double, dim + 1> fv;
  int evals = 0;

  pts[0] = x0;
  fv[0] = f(x0);
  ++evals;
  for (int i = 0; i < dim; ++i) {
    pts[i + 1] = x0;
    const double h = std::max(0.5 * std::abs(x0[i]), 1e-4);
    pts[i + 1][i] += h;
    fv[i + 1] = f(pts[i + 1]);
    ++evals;
  }

  auto order = [&]() {
    for (int i = 0; i <= dim; ++i)
      for (int j = i + 1; j <= dim; ++j)
        if (fv[j] < fv[i]) {
          std::swap(fv[i], fv[j]);
          std::swap(pts[i], pts[j]);
        }
  };

  while (evals < max_evals) {
    order();
    if (std::isfinite(fv[0]) && fv[dim] - fv[0] < tol) break;

    std::array<double, 3> centroid{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i)
      for (int c = 0; c < dim; ++c) centroid[c] += pts[i][c] / double(dim);

    auto blend = [&centroid](const std::array<double, 3>& p, double w) {
      std::array<double, 3> out;
      for (int c = 0; c < dim; ++c) out[c] = centroid[c] + w * (centroid[c] - p[c]);
      return out;
    };

    const auto reflected = blend(pts[dim], alpha);
    const double fr = f(reflected);
    ++evals;
    if (fr < fv[0]) {
      const auto expanded = blend(pts[dim], gamma);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        pts[dim] = expanded;
        fv[dim] = fe;
      } else {
        pts[dim] = reflected;
        fv[dim] = fr;
      }
      continue;
    }
    if (fr < fv[dim - 1]) {
      pts[dim] = reflected;
      fv[dim] = fr;
      continue;
    }
    const auto contracted = blend(pts[dim], -rho);
    const double fc = f(contracted);
    ++evals;
    if (fc < fv[dim]) {
      pts[dim] = contracted;
      fv[dim] = fc;
      continue;
    }
    for (int i = 1; i <= dim; ++i) {
      for (int c = 0; c < dim; ++c)
        pts[i][c] = pts[0][c] + shrink * (pts[i][c] - pts[0][c]);
      fv[i] = f(pts[i]);
      ++evals;
    }
  }

  order();
  return {pts[0], fv[0], evals};
}

}  // namespace

FitResult fit_coeffs(const std::vector<double>& stock_prices, double s0,
                     double mu_r, const DriverSeries& driver,
                     Convention convention, double df_h, double df_g,
                     ShapeKind shape, const FitOptions& opt,
                     const std::vector<std::array<double, 3>>& extra_starts) {
  if (stock_prices.size() != driver.z.size())
    throw Error(ErrorCode::Alignment,
                "stock path and driver must cover the same steps");
  if (stock_prices.size() < 4)
    throw Error(ErrorCode::Degenerate, "too few steps to fit three coefficients");

  EtaCoeffs base;
  base.df_h = df_h;
  base.df_g = df_g;
  base.shape = shape;

  int total_evals = 0;
  auto objective = [&](const std::array<double, 3>& c) {
    ++total_evals;
    EtaCoeffs trial = base;
    trial.c1 = c[0];
    trial.c2 = c[1];
    trial.c3 = c[2];
    try {
      const std::vector<double> model =
          pd_model_prices(s0, mu_r, trial, driver, convention);
      double ss = 0.0;
      for (std::size_t k = 0; k < model.size(); ++k) {
        const double d = model[k] - stock_prices[k];
        ss += d * d;
      }
      return std::isfinite(ss) ? ss : kInf;
    } catch (const Error&) {
      return kInf;
    }
  };

  std::vector<std::array<double, 3>> starts;
  for (double m1 : opt.start_magnitudes)
    for (double s1 : {-1.0, 1.0})
      for (double m2 : opt.start_magnitudes)
        for (double s2 : {-1.0, 1.0})
          for (double m3 : opt.start_magnitudes)
            for (double s3 : {-1.0, 1.0})
              starts.push_back({s1 * m1, s2 * m2, s3 * m3});
  starts.insert(starts.end(), extra_starts.begin(), extra_starts.end());

  SimplexResult best;
  for (const auto& start : starts) {
    const SimplexResult r = nelder_mead(objective, start, opt.tol, opt.max_evals);
    if (r.f < best.f) best = r;
  }
  if (!std::isfinite(best.f))
    throw Error(ErrorCode::Numeric, "coefficient fit found no admissible point");

  // Polish from the winner.
  const SimplexResult polished =
      nelder_mead(objective, best.x, opt.tol, opt.max_evals);
  if (polished.f < best.f) best = polished;

  FitResult out;
  out.coeffs = base;
  out.coeffs.c1 = best.x[0];
  out.coeffs.c2 = best.x[1];
  out.coeffs.c3 = best.x[2];
  out.residual = best.f;
  out.evals = total_evals;
  out.eta_floored = eta_path(out.coeffs, driver).floored;
  return out;
}

}  // namespace esgval
