#include "esgval/esg_returns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace esgval {

double normalize_esg(double score, const EsgNormalization& norm) {
  if (!(norm.c > 0.0))
    throw Error(ErrorCode::Domain, "normalization constant c must be positive");
  if (!(norm.esg_max > norm.esg_min))
    throw Error(ErrorCode::Domain, "esg_max must exceed esg_min");
  if (score < norm.esg_min || score > norm.esg_max)
    throw Error(ErrorCode::Domain, "ESG score outside [esg_min, esg_max]");
  const double mid = 0.5 * (norm.esg_min + norm.esg_max);
  const double halfrange = 0.5 * (norm.esg_max - norm.esg_min);
  return (score - mid) / (halfrange * norm.c);
}

std::vector<double> returns_from_closes(const std::vector<double>& closes,
                                        Convention convention) {
  if (closes.size() < 2)
    throw Error(ErrorCode::Degenerate, "need at least two closes to form returns");
  for (double c : closes)
    if (!(c > 0.0))
      throw Error(ErrorCode::Domain, "close prices must be positive");
  std::vector<double> r(closes.size() - 1);
  for (std::size_t k = 1; k < closes.size(); ++k) {
    const double ratio = closes[k] / closes[k - 1];
    r[k - 1] = convention == Convention::Arithmetic ? ratio - 1.0 : std::log(ratio);
  }
  return r;
}

std::vector<double> align_esg(const std::vector<Date>& dates,
                              const std::vector<RawEsgRecord>& records,
                              const EsgNormalization& norm) {
  if (records.empty())
    throw Error(ErrorCode::Alignment, "no ESG records supplied");
  for (std::size_t i = 1; i < records.size(); ++i)
    if (!(records[i - 1].effective_date < records[i].effective_date))
      throw Error(ErrorCode::Alignment,
                  "ESG effective dates must be strictly increasing");

  std::vector<double> e(dates.size());
  std::size_t j = 0;  // index of the last record applied
  for (std::size_t k = 0; k < dates.size(); ++k) {
    if (k > 0 && !(dates[k - 1] < dates[k]))
      throw Error(ErrorCode::Alignment, "step dates must be strictly increasing");
    if (records[0].effective_date > dates[k])
      throw Error(ErrorCode::Alignment,
                  "no ESG record on or before the first step date");
    while (j + 1 < records.size() && records[j + 1].effective_date <= dates[k]) ++j;
    e[k] = normalize_esg(records[j].score, norm);
  }
  return e;
}

EsgSeries blend_returns(std::vector<Date> dates, std::vector<double> r0,
                        std::vector<double> e, double lambda,
                        Convention convention) {
  if (r0.size() != e.size() || (!dates.empty() && dates.size() != r0.size()))
    throw Error(ErrorCode::InvalidArgument, "blend inputs must share one size");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::Domain, "lambda must lie in [0,1]");

  EsgSeries s;
  s.dates = std::move(dates);
  s.r0 = std::move(r0);
  s.e = std::move(e);
  s.lambda = lambda;
  s.convention = convention;
  s.r_lambda.resize(s.r0.size());
  for (std::size_t k = 0; k < s.r0.size(); ++k)
    s.r_lambda[k] = lambda * s.e[k] + (1.0 - lambda) * s.r0[k];
  return s;
}

std::vector<double> numeraire_prices(const EsgSeries& series, double s0) {
  if (!(s0 > 0.0))
    throw Error(ErrorCode::Domain, "starting value must be positive");
  std::vector<double> prices(series.size());
  double s = s0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double r = series.r_lambda[k];
    if (series.convention == Convention::Arithmetic) {
      if (!(1.0 + r > 0.0))
        throw Error(ErrorCode::Domain,
                    "arithmetic return at or below -1 makes the price nonpositive");
      s *= 1.0 + r;
    } else {
      s *= std::exp(r);
    }
    if (!std::isfinite(s))
      throw Error(ErrorCode::Numeric, "price path overflow");
    prices[k] = s;
  }
  return prices;
}

namespace {

struct Moments {
  double mean;
  double stdev;
};

Moments sample_moments(const std::vector<double>& x, bool unbiased) {
  if (x.size() < 2)
    throw Error(ErrorCode::Degenerate, "need at least two steps");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double denom = unbiased ? double(x.size() - 1) : double(x.size());
  return {mean, std::sqrt(ss / denom)};
}

}  // namespace

ModelParams estimate_params(const EsgSeries& series, const EstimateOptions& opt) {
  if (!(opt.dt > 0.0)) throw Error(ErrorCode::Domain, "dt must be positive");
  const auto [mean, stdev] = sample_moments(series.r_lambda, opt.unbiased);
  if (stdev == 0.0)
    throw Error(ErrorCode::Degenerate, "zero return variance, volatility undefined");

  ModelParams params;
  params.convention = series.convention;
  params.sigma = stdev / std::sqrt(opt.dt);
  params.mu = mean / opt.dt;
  if (series.convention == Convention::Log)
    params.mu += 0.5 * params.sigma * params.sigma;

  std::size_t up = 0;
  for (double r : series.r_lambda)
    if (r >= 0.0) ++up;
  const double frac = double(up) / double(series.size());
  params.p = std::clamp(frac, opt.p_clamp, 1.0 - opt.p_clamp);
  return params;
}

double max_drawdown(const std::vector<double>& prices) {
  double peak = 0.0;
  double mdd = 0.0;
  for (double s : prices) {
    if (!(s > 0.0))
      throw Error(ErrorCode::Domain, "drawdown path must be positive");
    peak = std::max(peak, s);
    mdd = std::max(mdd, (peak - s) / peak);
  }
  return mdd;
}

SeriesStats series_stats(const EsgSeries& series, double rf, double dt) {
  const auto [mean, stdev] = sample_moments(series.r_lambda, true);
  if (stdev == 0.0)
    throw Error(ErrorCode::Degenerate, "zero return variance, Sharpe undefined");

  SeriesStats stats;
  stats.mean = mean;
  stats.stdev = stdev;
  stats.sharpe = (mean - rf * dt) / stdev;

  std::vector<double> path = numeraire_prices(series, 1.0);
  path.insert(path.begin(), 1.0);
  stats.mdd = max_drawdown(path);
  return stats;
}

EsgSeries build_index(const std::vector<EsgSeries>& components) {
  if (components.empty())
    throw Error(ErrorCode::InvalidArgument, "index needs at least one component");
  const EsgSeries& first = components.front();
  for (const EsgSeries& c : components) {
    if (c.size() != first.size() || c.dates != first.dates)
      throw Error(ErrorCode::Alignment, "index components must share step dates");
    if (c.lambda != first.lambda || c.convention != first.convention)
      throw Error(ErrorCode::InvalidArgument,
                  "index components must share lambda and convention");
  }

  const double w = 1.0 / double(components.size());
  EsgSeries index;
  index.dates = first.dates;
  index.lambda = first.lambda;
  index.convention = first.convention;
  index.r0.assign(first.size(), 0.0);
  index.e.assign(first.size(), 0.0);
  index.r_lambda.assign(first.size(), 0.0);
  for (const EsgSeries& c : components)
    for (std::size_t k = 0; k < first.size(); ++k) {
      index.r0[k] += w * c.r0[k];
      index.e[k] += w * c.e[k];
      index.r_lambda[k] += w * c.r_lambda[k];
    }
  return index;
}

}  // namespace esgval
