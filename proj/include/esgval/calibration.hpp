#pragma once

#include "esgval/path_dependent.hpp"
#include "esgval/types.hpp"

namespace esgval {

struct OptionQuote {
  double strike = 0.0;
  int t_days = 0;       // steps to expiry
  double mid = 0.0;     // market mid price, must be positive
  double spot = 0.0;    // valuation-date underlying price
};

enum class CellStatus { Converged, Boundary, Singular, Empty };

struct SurfaceCell {
  int t_days = 0;
  double moneyness = 0.0;  // strike/spot
  double value = 0.0;
  double residual = 0.0;   // objective at the reported value
  CellStatus status = CellStatus::Empty;
  bool multimodal = false;  // scalar search brackets disagreed materially
};

struct Surface {
  std::vector<SurfaceCell> cells;  // sorted by t_days, then moneyness
};

const char* cell_status_name(CellStatus status);

struct CalibConfig {
  std::vector<double> lambda_grid;  // defaults to 0, 0.01, ..., 1
  double sigma_lo = 1e-4;
  double sigma_hi = 5.0;
  double tol = 1e-6;       // parameter tolerance of scalar searches
  int brackets = 5;        // multi-start sub-brackets
  double dt = 1.0 / 252.0;
  double rf = 0.0;         // per unit time
  double theta_floor = 1e-8;
  int pd_path_cap = 22;

  CalibConfig();
};

// Squared relative pricing error ((model - market)/market)^2.
double calibration_objective(double model_price, double market_price);

enum class ModelKind { Plain, Informed, PathDependent };

// Per-lambda pricing inputs for the path-dependent model.
struct PdContext {
  double mu_r = 0.0;
  EtaCoeffs coeffs;
  const DriverSeries* driver = nullptr;
  Convention convention = Convention::Arithmetic;
};

// Per-lambda parameter table aligned with config.lambda_grid.
struct LambdaParamTable {
  std::vector<ModelParams> params;   // Plain model, one per grid lambda
  std::vector<PdContext> pd;         // PathDependent model, may be empty
};

// Exhaustive grid search over lambda; ties resolve to the smallest lambda.
// Cells whose every candidate fails to price are Empty.
SurfaceCell implied_lambda(const OptionQuote& quote,
                           const LambdaParamTable& table,
                           const CalibConfig& config, ModelKind model);

// Continuous scalar searches: golden sections over config.brackets
// sub-brackets, best bracket wins. An argmin within tolerance of the domain
// edge is Boundary.
SurfaceCell implied_sigma(const OptionQuote& quote, const ModelParams& base,
                          const CalibConfig& config);
SurfaceCell implied_sigma_bsm(const OptionQuote& quote,
                              const CalibConfig& config);

// Information-intensity search over (0, 1/sqrt(dt)). A Sharpe ratio below
// theta_floor (arithmetic convention) is a no-information Singular cell.
SurfaceCell implied_delta(const OptionQuote& quote, const ModelParams& base,
                          const CalibConfig& config);

// 100*(a-b)/b per cell on matching (t_days, moneyness) grids. Cells with
// b = 0, or present in only one surface, are omitted; omitted_zero_base
// counts the zero-base omissions.
Surface relative_change_surface(const Surface& a, const Surface& b,
                                int* omitted_zero_base = nullptr);

void sort_surface(Surface& surface);

}  // namespace esgval
