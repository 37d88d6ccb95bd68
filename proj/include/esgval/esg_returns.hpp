#pragma once

#include "esgval/types.hpp"

namespace esgval {

// Maps a raw score in [esg_min, esg_max] onto a per-step return increment in
// [-1/c, 1/c], centered at the scale midpoint. With the defaults a score of 50
// on a 0..100 scale maps to zero and c spreads the unit range over one year of
// trading days.
struct EsgNormalization {
  double esg_min = 0.0;
  double esg_max = 100.0;
  double c = 252.0;
};

struct RawEsgRecord {
  Date effective_date;
  double score = 0.0;
};

double normalize_esg(double score, const EsgNormalization& norm = {});

// Per-step returns from a close series: S_k/S_{k-1}-1 or ln(S_k/S_{k-1}).
// Closes must be positive; output has size closes.size()-1.
std::vector<double> returns_from_closes(const std::vector<double>& closes,
                                        Convention convention);

// Last-observation-carried-forward alignment of normalized scores onto the
// given step dates. Each step uses the most recent record effective on or
// before it; a step before every record is an alignment error. Records must
// have strictly increasing effective dates.
std::vector<double> align_esg(const std::vector<Date>& dates,
                              const std::vector<RawEsgRecord>& records,
                              const EsgNormalization& norm = {});

// r_lambda[k] = lambda*e[k] + (1-lambda)*r0[k]. lambda must lie in [0,1] and
// all vectors must share one size.
EsgSeries blend_returns(std::vector<Date> dates, std::vector<double> r0,
                        std::vector<double> e, double lambda,
                        Convention convention);

// Cumulates r_lambda into a price path starting from s0 (the starting value
// itself is not included in the output). Arithmetic steps at or below -1 make
// the price nonpositive and are rejected.
std::vector<double> numeraire_prices(const EsgSeries& series, double s0);

struct EstimateOptions {
  double dt = 1.0 / 252.0;
  bool unbiased = true;     // n-1 denominator for the standard deviation
  double p_clamp = 1e-6;    // keeps p away from {0,1}
};

// Moment estimates of (mu, sigma, p) from a blended series. Arithmetic:
// mu = mean/dt. Log: mu = mean/dt + sigma^2/2 so that mu is the price drift.
// Both: sigma = stdev/sqrt(dt), p = clamped fraction of nonnegative steps.
// A series with zero variance is degenerate.
ModelParams estimate_params(const EsgSeries& series, const EstimateOptions& opt);

// Peak-to-trough maximum drawdown of a price path, as a fraction of the
// running peak. The path must be positive.
double max_drawdown(const std::vector<double>& prices);

// Per-step mean/stdev, Sharpe ratio (mean - rf*dt)/stdev and max drawdown of
// the numeraire path started at 1. rf is per unit time of dt.
SeriesStats series_stats(const EsgSeries& series, double rf, double dt);

// Equal-weighted index of aligned components: returns and ESG increments are
// averaged per step. Components must share dates, lambda and convention.
EsgSeries build_index(const std::vector<EsgSeries>& components);

}  // namespace esgval
