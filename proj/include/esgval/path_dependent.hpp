#pragma once

#include <array>

#include "esgval/types.hpp"

namespace esgval {

double student_t_pdf(double x, double df);
double student_t_cdf(double x, double df);

// Market-driver innovations extracted from a return series. Returns are
// standardized, reduced to signs and mapped onto the unit-variance two-point
// variable z = pu on nonnegative standardized returns and -pd otherwise,
// where pu/pd derive from the empirical up fraction p_m.
struct DriverSeries {
  std::vector<double> z;  // innovations, one per step
  std::vector<double> x;  // cumulative path, x[0] = 0, size z.size()+1
  double p_m = 0.5;       // clamped up fraction
  double dt = 1.0 / 252.0;
};

DriverSeries standardize_driver(const std::vector<double>& returns, double dt,
                                double p_clamp = 1e-6);

enum class ShapeKind { Density, Cdf };

// Volatility response eta = c1 + c2*h(X) + c3*g(I) where h and g are
// Student-t shapes (densities by default) of the cumulative driver path X and
// its running time integral I. Values at or below eta_floor are floored and
// flagged so downstream volatilities stay positive.
struct EtaCoeffs {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double df_h = 5.0;
  double df_g = 5.0;
  ShapeKind shape = ShapeKind::Density;
  double eta_floor = 1e-6;
};

double eta_shape(const EtaCoeffs& coeffs, double x, double integral,
                 bool* floored = nullptr);

struct EtaPath {
  std::vector<double> values;  // values[k] drives step k+1
  bool floored = false;
};

// Per-step eta along the driver history. values[k] uses the driver through
// step k only (x[k] and the left-Riemann integral over earlier steps), so the
// response is predictable: innovations after step k never change values[k].
EtaPath eta_path(const EtaCoeffs& coeffs, const DriverSeries& driver);

// One step of the path-dependent tree. Both conventions share the move pair
// U = mu_r*dt + eta*pu*sqrt(dt), D = mu_r*dt - eta*pd*sqrt(dt) built on the
// driver up fraction p_m; q is the convention's exact martingale probability.
StepMoves pd_moves(double mu_r, double eta_k, double p_m, double rf, double dt,
                   Convention convention);

// Realized model path: S_k = S_{k-1} compounded by mu_r*dt + eta_{k-1}*z_k*sqrt(dt)
// in the given convention, started at s0.
std::vector<double> pd_model_prices(double s0, double mu_r,
                                    const EtaCoeffs& coeffs,
                                    const DriverSeries& driver,
                                    Convention convention);

// European price under the driver-conditioned eta sequence. Up to path_cap
// steps the 2^steps path expectation is exact; beyond it the step-varying
// moves are laid on a per-level recombining lattice, the usual approximation
// for time-varying binomial parameters.
PricingResult pd_price_european(const LatticeSpec& spec, double mu_r,
                                const EtaCoeffs& coeffs,
                                const DriverSeries& driver,
                                Convention convention, int path_cap = 22);

struct FitOptions {
  double tol = 1e-10;        // objective spread tolerance of the simplex
  int max_evals = 4000;      // per start
  std::vector<double> start_magnitudes = {1e-3, 1e-2};
};

struct FitResult {
  EtaCoeffs coeffs;
  double residual = 0.0;  // sum of squared price differences at the optimum
  bool eta_floored = false;
  int evals = 0;
};

// Least-squares fit of (c1, c2, c3) matching the realized stock path to the
// driver-conditioned model path, via a Nelder-Mead simplex started from every
// sign/magnitude combination of start_magnitudes (plus any extra_starts).
FitResult fit_coeffs(const std::vector<double>& stock_prices, double s0,
                     double mu_r, const DriverSeries& driver,
                     Convention convention, double df_h, double df_g,
                     ShapeKind shape, const FitOptions& opt = {},
                     const std::vector<std::array<double, 3>>& extra_starts = {});

}  // namespace esgval
