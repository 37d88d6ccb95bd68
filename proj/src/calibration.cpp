#include "esgval/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "esgval/binomial_engine.hpp"
#include "esgval/informed_market.hpp"

namespace esgval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LatticeSpec lattice_for(const OptionQuote& quote, const CalibConfig& config) {
  if (!(quote.spot > 0.0))
    throw Error(ErrorCode::Domain, "quote needs a positive spot");
  if (quote.t_days < 1)
    throw Error(ErrorCode::InvalidArgument, "quote needs at least one step to expiry");
  LatticeSpec spec;
  spec.s0 = quote.spot;
  spec.strike = quote.strike;
  spec.steps = quote.t_days;
  spec.dt = config.dt;
  spec.rf = config.rf;
  spec.payoff = PayoffKind::EuropeanCall;
  return spec;
}

void check_quote(const OptionQuote& quote) {
  if (!(quote.mid > 0.0))
    throw Error(ErrorCode::InvalidArgument, "market price must be positive");
}

struct ScalarMinimum {
  double x = 0.0;
  double f = kInf;
  bool boundary = false;
  bool multimodal = false;
  bool valid = false;
};

// Golden-section search over [lo, hi] restarted on `brackets` equal
// sub-brackets; the best local minimum wins. Objectives may return +inf for
// inadmissible points.
ScalarMinimum golden_multistart(const std::function<double(double)>& f,
                                double lo, double hi, double tol, int brackets) {
  constexpr double invphi = 0.6180339887498949;
  ScalarMinimum best;
  std::vector<ScalarMinimum> locals;

  const double width = (hi - lo) / double(brackets);
  for (int b = 0; b < brackets; ++b) {
    double a = lo + width * double(b);
    double d = b + 1 == brackets ? hi : a + width;
    double x1 = d - invphi * (d - a);
    double x2 = a + invphi * (d - a);
    double f1 = f(x1), f2 = f(x2);
    while (d - a > tol) {
      if (f1 <= f2) {
        d = x2;
        x2 = x1;
        f2 = f1;
        x1 = d - invphi * (d - a);
        f1 = f(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (d - a);
        f2 = f(x2);
      }
    }
    ScalarMinimum local;
    local.x = 0.5 * (a + d);
    local.f = f(local.x);
    local.valid = std::isfinite(local.f);
    if (local.valid) locals.push_back(local);
    if (local.valid && local.f < best.f) {
      best = local;
      best.valid = true;
    }
  }
  if (!best.valid) return best;

  // Materially distinct local minima of comparable depth mean the objective
  // was not unimodal; the best one is still returned.
  for (const ScalarMinimum& local : locals)
    if (std::abs(local.x - best.x) > 100.0 * tol &&
        local.f <= best.f * (1.0 + 1e-3) + 1e-18)
      best.multimodal = true;

  best.boundary = best.x - lo <= 10.0 * tol || hi - best.x <= 10.0 * tol;
  return best;
}

SurfaceCell cell_from(const OptionQuote& quote, const ScalarMinimum& min) {
  SurfaceCell cell;
  cell.t_days = quote.t_days;
  cell.moneyness = quote.strike / quote.spot;
  if (!min.valid) {
    cell.status = CellStatus::Empty;
    return cell;
  }
  cell.value = min.x;
  cell.residual = min.f;
  cell.status = min.boundary ? CellStatus::Boundary : CellStatus::Converged;
  cell.multimodal = min.multimodal;
  return cell;
}

}  // namespace

CalibConfig::CalibConfig() {
  lambda_grid.reserve(101);
  for (int i = 0; i <= 100; ++i) lambda_grid.push_back(double(i) / 100.0);
}

double calibration_objective(double model_price, double market_price) {
  if (!(market_price > 0.0))
    throw Error(ErrorCode::InvalidArgument, "market price must be positive");
  if (!std::isfinite(model_price))
    throw Error(ErrorCode::Numeric, "model price is not finite");
  const double rel = (model_price - market_price) / market_price;
  return rel * rel;
}

const char* cell_status_name(CellStatus status) {
  switch (status) {
    case CellStatus::Converged: return "converged";
    case CellStatus::Boundary: return "boundary";
    case CellStatus::Singular: return "singular";
    case CellStatus::Empty: return "empty";
  }
  return "empty";
}

SurfaceCell implied_lambda(const OptionQuote& quote,
                           const LambdaParamTable& table,
                           const CalibConfig& config, ModelKind model) {
  check_quote(quote);
  if (model == ModelKind::Informed)
    throw Error(ErrorCode::InvalidArgument,
                "implied lambda supports the plain and path-dependent models");
  const std::size_t n = config.lambda_grid.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty lambda grid");
  if (model == ModelKind::Plain && table.params.size() != n)
    throw Error(ErrorCode::InvalidArgument,
                "parameter table must cover the lambda grid");
  if (model == ModelKind::PathDependent && table.pd.size() != n)
    throw Error(ErrorCode::InvalidArgument,
                "path-dependent table must cover the lambda grid");

  const LatticeSpec spec = lattice_for(quote, config);

  SurfaceCell cell;
  cell.t_days = quote.t_days;
  cell.moneyness = quote.strike / quote.spot;
  cell.status = CellStatus::Empty;

  bool have = false;
  double best_obj = kInf;
  double best_lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double price;
    try {
      if (model == ModelKind::Plain) {
        price = price_european(spec, table.params[i]).price;
      } else {
        const PdContext& ctx = table.pd[i];
        if (ctx.driver == nullptr)
          throw Error(ErrorCode::InvalidArgument, "missing driver context");
        price = pd_price_european(spec, ctx.mu_r, ctx.coeffs, *ctx.driver,
                                  ctx.convention, config.pd_path_cap)
                    .price;
      }
    } catch (const Error&) {
      continue;
    }
    const double obj = calibration_objective(price, quote.mid);
    if (!have || obj < best_obj) {  // strict comparison keeps the smallest lambda
      have = true;
      best_obj = obj;
      best_lambda = config.lambda_grid[i];
    }
  }

  if (!have) return cell;
  cell.value = best_lambda;
  cell.residual = best_obj;
  cell.status = CellStatus::Converged;
  return cell;
}

SurfaceCell implied_sigma(const OptionQuote& quote, const ModelParams& base,
                          const CalibConfig& config) {
  check_quote(quote);
  const LatticeSpec spec = lattice_for(quote, config);

  auto objective = [&](double sigma) {
    ModelParams trial = base;
    trial.sigma = sigma;
    try {
      return calibration_objective(price_european(spec, trial).price, quote.mid);
    } catch (const Error&) {
      return kInf;
    }
  };
  const ScalarMinimum min = golden_multistart(objective, config.sigma_lo,
                                              config.sigma_hi, config.tol,
                                              config.brackets);
  return cell_from(quote, min);
}

SurfaceCell implied_sigma_bsm(const OptionQuote& quote,
                              const CalibConfig& config) {
  check_quote(quote);
  if (!(quote.spot > 0.0))
    throw Error(ErrorCode::Domain, "quote needs a positive spot");
  const double t = double(quote.t_days) * config.dt;

  auto objective = [&](double sigma) {
    try {
      return calibration_objective(
          bsm_call(quote.spot, quote.strike, config.rf, sigma, t), quote.mid);
    } catch (const Error&) {
      return kInf;
    }
  };
  const ScalarMinimum min = golden_multistart(objective, config.sigma_lo,
                                              config.sigma_hi, config.tol,
                                              config.brackets);
  return cell_from(quote, min);
}

SurfaceCell implied_delta(const OptionQuote& quote, const ModelParams& base,
                          const CalibConfig& config) {
  check_quote(quote);
  const LatticeSpec spec = lattice_for(quote, config);

  if (base.convention == Convention::Arithmetic) {
    const double theta = sharpe_theta(base, config.rf);
    if (std::abs(theta) < config.theta_floor) {
      SurfaceCell cell;
      cell.t_days = quote.t_days;
      cell.moneyness = quote.strike / quote.spot;
      cell.value = 0.0;  // no-information configuration
      cell.residual = 0.0;
      cell.status = CellStatus::Singular;
      return cell;
    }
  }

  const double delta_max = 1.0 / std::sqrt(config.dt);
  const double lo = config.tol;
  const double hi = delta_max * (1.0 - 1e-9);

  auto objective = [&](double delta) {
    try {
      const StepMoves m =
          base.convention == Convention::Arithmetic
              ? informed_moves_arith(base, delta, config.rf, spec.dt,
                                     config.theta_floor)
              : informed_moves_log(base, delta, config.rf, spec.dt);
      const std::vector<StepMoves> per_step(std::size_t(spec.steps), m);
      const double price =
          price_lattice(spec, per_step, base.convention).price;
      return calibration_objective(price, quote.mid);
    } catch (const Error&) {
      return kInf;
    }
  };
  const ScalarMinimum min =
      golden_multistart(objective, lo, hi, config.tol, config.brackets);
  return cell_from(quote, min);
}

Surface relative_change_surface(const Surface& a, const Surface& b,
                                int* omitted_zero_base) {
  int omitted = 0;
  Surface out;
  for (const SurfaceCell& cb : b.cells) {
    const SurfaceCell* ca = nullptr;
    for (const SurfaceCell& cell : a.cells)
      if (cell.t_days == cb.t_days && cell.moneyness == cb.moneyness) {
        ca = &cell;
        break;
      }
    if (ca == nullptr) continue;
    if (ca->status == CellStatus::Empty || cb.status == CellStatus::Empty)
      continue;
    if (cb.value == 0.0) {
      ++omitted;
      continue;
    }
    SurfaceCell cell;
    cell.t_days = cb.t_days;
    cell.moneyness = cb.moneyness;
    cell.value = 100.0 * (ca->value - cb.value) / cb.value;
    cell.residual = 0.0;
    cell.status = CellStatus::Converged;
    out.cells.push_back(cell);
  }
  if (omitted_zero_base) *omitted_zero_base = omitted;
  sort_surface(out);
  return out;
}

void sort_surface(Surface& surface) {
  std::sort(surface.cells.begin(), surface.cells.end(),
            [](const SurfaceCell& l, const SurfaceCell& r) {
              if (l.t_days != r.t_days) return l.t_days < r.t_days;
              return l.moneyness < r.moneyness;
            });
}

}  // namespace esgval
