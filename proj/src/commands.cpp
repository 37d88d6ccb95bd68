#include "esgval/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "esgval/binomial_engine.hpp"
#include "esgval/calibration.hpp"
#include "esgval/esg_returns.hpp"
#include "esgval/informed_market.hpp"
#include "esgval/path_dependent.hpp"

namespace esgval {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_lambda(double lambda) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", lambda);
  return buf;
}

struct StagedFile {
  std::string path;
  std::string content;
};

// Stage-then-commit emission: every file is written to a temporary sibling
// before any output is moved into place.
void commit_files(const std::string& out_dir, std::vector<StagedFile>& files) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + out_dir);
  for (StagedFile& f : files) f.path = out_dir + "/" + f.path;
  for (const StagedFile& f : files) write_file_atomic(f.path, f.content);
}

struct MarketInputs {
  std::vector<PriceRow> prices;
  std::vector<RawEsgRecord> esg;
  EsgNormalization norm;
  Convention convention = Convention::Arithmetic;
  double dt = 1.0 / 252.0;
  double rf = 0.0;  // per unit time of dt's unit (annual)
  bool unbiased = true;
};

EsgNormalization norm_from(const RunConfig& config) {
  EsgNormalization norm;
  norm.esg_min = config.get_double_or("esg_min", 0.0);
  norm.esg_max = config.get_double_or("esg_max", 100.0);
  norm.c = config.get_double_or("c", 252.0);
  return norm;
}

MarketInputs load_market(const RunConfig& config, const std::string& price_key,
                         const std::string& esg_key) {
  MarketInputs in;
  in.prices = read_price_csv(config.get_string(price_key));
  in.esg = read_esg_csv(config.get_string(esg_key));
  in.norm = norm_from(config);
  in.convention = config.get_convention_or("convention", Convention::Arithmetic);
  const double steps_per_year = config.get_double_or("steps_per_year", 252.0);
  if (!(steps_per_year > 0.0))
    throw Error(ErrorCode::InvalidArgument, "steps_per_year must be positive");
  in.dt = 1.0 / steps_per_year;
  in.rf = config.get_double_or("rf_annual", 0.0);
  in.unbiased = config.get_bool_or("unbiased_stdev", true);
  return in;
}

EsgSeries blend_at(const MarketInputs& in, double lambda) {
  std::vector<double> closes(in.prices.size());
  std::vector<Date> dates(in.prices.size());
  for (std::size_t i = 0; i < in.prices.size(); ++i) {
    closes[i] = in.prices[i].close;
    dates[i] = in.prices[i].date;
  }
  std::vector<double> r0 = returns_from_closes(closes, in.convention);
  std::vector<Date> step_dates(dates.begin() + 1, dates.end());
  std::vector<double> e = align_esg(step_dates, in.esg, in.norm);
  return blend_returns(std::move(step_dates), std::move(r0), std::move(e),
                       lambda, in.convention);
}

ModelParams estimate_at(const MarketInputs& in, double lambda) {
  EstimateOptions opt;
  opt.dt = in.dt;
  opt.unbiased = in.unbiased;
  return estimate_params(blend_at(in, lambda), opt);
}

std::vector<double> lambda_list(const RunConfig& config) {
  if (!config.has("lambda")) return {0.0};
  std::vector<double> list = config.get_double_list("lambda");
  for (double l : list)
    if (!(l >= 0.0 && l <= 1.0))
      throw Error(ErrorCode::Domain, "lambda values must lie in [0,1]");
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  return list;
}

std::vector<double> lambda_grid(const RunConfig& config) {
  if (!config.has("lambda_grid")) {
    CalibConfig defaults;
    return defaults.lambda_grid;
  }
  std::vector<double> grid = config.get_double_list("lambda_grid");
  for (double l : grid)
    if (!(l >= 0.0 && l <= 1.0))
      throw Error(ErrorCode::Domain, "lambda grid values must lie in [0,1]");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty())
    throw Error(ErrorCode::InvalidArgument, "lambda grid is empty");
  return grid;
}

}  // namespace

std::string run_esg_price(const RunConfig& config, const std::string& out_dir) {
  const MarketInputs in = load_market(config, "price_csv", "esg_csv");
  const std::vector<double> lambdas = lambda_list(config);

  std::ostringstream csv;
  csv << "# config_hash=" << config.hash_hex() << "\n";
  csv << "date,lambda,price\n";
  for (double lambda : lambdas) {
    const EsgSeries series = blend_at(in, lambda);
    const std::vector<double> prices = numeraire_prices(series, 1.0);
    for (std::size_t k = 0; k < prices.size(); ++k)
      csv << format_date(series.dates[k]) << "," << fmt_lambda(lambda) << ","
          << fmt(prices[k]) << "\n";
  }

  std::vector<StagedFile> files{{"esg_prices.csv", csv.str()}};
  commit_files(out_dir, files);

  std::ostringstream report;
  report << "wrote " << files[0].path << " (" << lambdas.size()
         << " lambda values, " << in.prices.size() - 1 << " steps each)\n";
  return report.str();
}

std::string run_estimate(const RunConfig& config, const std::string& out_dir) {
  MarketInputs in = load_market(config, "price_csv", "esg_csv");
  const std::vector<double> lambdas = lambda_list(config);

  std::ostringstream csv;
  csv << "# config_hash=" << config.hash_hex() << "\n";
  csv << "convention,lambda,mu_per_step,sigma_per_step,p,mu_annual,sigma_annual\n";
  for (Convention conv : {Convention::Arithmetic, Convention::Log}) {
    in.convention = conv;
    for (double lambda : lambdas) {
      const ModelParams params = estimate_at(in, lambda);
      csv << (conv == Convention::Arithmetic ? "arith" : "log") << ","
          << fmt_lambda(lambda) << "," << fmt(params.mu * in.dt) << ","
          << fmt(params.sigma * std::sqrt(in.dt)) << "," << fmt(params.p) << ","
          << fmt(params.mu) << "," << fmt(params.sigma) << "\n";
    }
  }

  std::vector<StagedFile> files{{"params.csv", csv.str()}};
  commit_files(out_dir, files);

  std::ostringstream report;
  report << "wrote " << files[0].path << " (" << 2 * lambdas.size()
         << " rows)\n";
  return report.str();
}

namespace {

double spot_on_or_before(const std::vector<PriceRow>& prices, Date date) {
  const PriceRow* last = nullptr;
  for (const PriceRow& row : prices) {
    if (row.date > date) break;
    last = &row;
  }
  if (last == nullptr)
    throw Error(ErrorCode::Alignment, "no close on or before the quote date");
  return last->close;
}

struct PricedModel {
  ModelParams params;
  double s0 = 0.0;
  bool from_series = false;
  ModelParams params_zero;  // lambda = 0 companion when estimated from files
  double lambda = 0.0;
};

PricedModel resolve_params(const RunConfig& config) {
  PricedModel out;
  const std::vector<double> lambdas = lambda_list(config);
  out.lambda = lambdas.front();
  if (config.has("price_csv")) {
    const MarketInputs in = load_market(config, "price_csv", "esg_csv");
    out.params = estimate_at(in, out.lambda);
    out.params_zero = estimate_at(in, 0.0);
    out.s0 = config.get_double_or("s0", in.prices.back().close);
    out.from_series = true;
    return out;
  }
  out.params.mu = config.get_double("mu");
  out.params.sigma = config.get_double("sigma");
  out.params.p = config.get_double("p");
  out.params.convention =
      config.get_convention_or("convention", Convention::Arithmetic);
  out.s0 = config.get_double("s0");
  return out;
}

}  // namespace

std::string run_price(const RunConfig& config) {
  const PricedModel model = resolve_params(config);
  const double steps_per_year = config.get_double_or("steps_per_year", 252.0);
  const double dt = 1.0 / steps_per_year;
  const double rf = config.get_double_or("rf_annual", 0.0);
  const std::string kind = config.get_string_or("model", "plain");

  LatticeSpec spec;
  spec.s0 = model.s0;
  spec.strike = config.get_double("strike");
  spec.steps = int(config.get_long("expiry_days"));
  spec.dt = dt;
  spec.rf = rf;

  PricingResult result;
  std::string yield_line = "dividend_yield = n/a\n";
  if (kind == "plain") {
    result = price_european(spec, model.params);
    if (model.from_series && model.lambda > 0.0)
      yield_line = "dividend_yield = " +
                   fmt(esg_dividend_yield(model.params, model.params_zero, rf)) +
                   " (esg)\n";
  } else if (kind == "informed") {
    const double delta = config.get_double("delta");
    const StepMoves m =
        model.params.convention == Convention::Arithmetic
            ? informed_moves_arith(model.params, delta, rf, dt,
                                   config.get_double_or("theta_floor", 1e-8))
            : informed_moves_log(model.params, delta, rf, dt);
    result = price_lattice(spec, std::vector<StepMoves>(std::size_t(spec.steps), m),
                           model.params.convention);
    yield_line = "dividend_yield = " +
                 fmt(informed_dividend_yield(model.params, delta, rf, dt)) +
                 " (informed)\n";
  } else if (kind == "pathdep") {
    const MarketInputs driver_in =
        load_market(config, "driver_price_csv", "driver_esg_csv");
    const EsgSeries driver_series = blend_at(driver_in, model.lambda);
    const DriverSeries driver = standardize_driver(driver_series.r_lambda, dt);
    EtaCoeffs coeffs;
    coeffs.c1 = config.get_double("c1");
    coeffs.c2 = config.get_double("c2");
    coeffs.c3 = config.get_double("c3");
    coeffs.df_h = config.get_double_or("df_h", config.get_double_or("df", 5.0));
    coeffs.df_g = config.get_double_or("df_g", config.get_double_or("df", 5.0));
    coeffs.shape = config.get_string_or("shapes", "density") == "cdf"
                       ? ShapeKind::Cdf
                       : ShapeKind::Density;
    coeffs.eta_floor = config.get_double_or("eta_floor", 1e-6);
    const double mu_r = model.from_series ? model.params.mu : config.get_double("mu");
    result = pd_price_european(spec, mu_r, coeffs, driver,
                               model.params.convention,
                               int(config.get_long_or("pd_path_cap", 22)));
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "model must be plain, informed or pathdep");
  }

  std::ostringstream report;
  report << "model = " << kind << "\n"
         << "convention = "
         << (model.params.convention == Convention::Arithmetic ? "arith" : "log")
         << "\n"
         << "lambda = " << fmt_lambda(model.lambda) << "\n"
         << "s0 = " << fmt(model.s0) << "  strike = " << fmt(spec.strike)
         << "  steps = " << spec.steps << "\n"
         << "price = " << fmt(result.price) << "\n"
         << "q_min = " << fmt(result.q_min) << "  q_max = " << fmt(result.q_max)
         << "\n"
         << "arb_violation = " << (result.arb_violation ? "true" : "false")
         << "\n"
         << yield_line;
  return report.str();
}

namespace {

struct SurfaceOutput {
  std::string name;
  Surface surface;
  int omitted = 0;
};

struct QuoteSet {
  std::vector<OptionQuote> quotes;
  int dropped_nonpositive = 0;
  int dropped_zero_steps = 0;
  Date quote_date;
};

QuoteSet quotes_from_chain(const Chain& chain,
                           const std::vector<PriceRow>& prices) {
  QuoteSet out;
  out.quote_date = chain.quote_date;
  out.dropped_nonpositive = chain.dropped_nonpositive;
  const double spot = spot_on_or_before(prices, chain.quote_date);
  std::set<std::pair<int, double>> seen;
  for (const ChainRow& row : chain.rows) {
    OptionQuote q;
    q.strike = row.strike;
    q.mid = row.mid;
    q.spot = spot;
    q.t_days = trading_days_between(row.quote_date, row.expiry);
    if (q.t_days < 1) {
      ++out.dropped_zero_steps;
      continue;
    }
    if (!seen.insert({q.t_days, q.strike}).second)
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate quote for one maturity/strike pair");
    out.quotes.push_back(q);
  }
  if (out.quotes.empty())
    throw Error(ErrorCode::Degenerate, "no usable quotes in the chain");
  return out;
}

// Evaluates one cell per quote, in parallel, preserving quote order.
Surface map_cells(const std::vector<OptionQuote>& quotes,
                  const std::function<SurfaceCell(const OptionQuote&)>& eval) {
  Surface surface;
  surface.cells.resize(quotes.size());
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            unsigned(quotes.size())));
  std::vector<std::future<void>> tasks;
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= quotes.size()) return;
        surface.cells[i] = eval(quotes[i]);
      }
    }));
  for (auto& t : tasks) t.get();
  sort_surface(surface);
  return surface;
}

std::string surface_manifest_line(const SurfaceOutput& out) {
  int converged = 0, boundary = 0, singular = 0, empty = 0, multimodal = 0;
  for (const SurfaceCell& c : out.surface.cells) {
    switch (c.status) {
      case CellStatus::Converged: ++converged; break;
      case CellStatus::Boundary: ++boundary; break;
      case CellStatus::Singular: ++singular; break;
      case CellStatus::Empty: ++empty; break;
    }
    if (c.multimodal) ++multimodal;
  }
  std::ostringstream line;
  line << "surface=" << out.name << " cells=" << out.surface.cells.size()
       << " converged=" << converged << " boundary=" << boundary
       << " singular=" << singular << " empty=" << empty
       << " multimodal=" << multimodal << " omitted=" << out.omitted << "\n";
  return line.str();
}

EtaCoeffs coeffs_from(const RunConfig& config) {
  EtaCoeffs coeffs;
  coeffs.df_h = config.get_double_or("df_h", config.get_double_or("df", 5.0));
  coeffs.df_g = config.get_double_or("df_g", config.get_double_or("df", 5.0));
  coeffs.shape = config.get_string_or("shapes", "density") == "cdf"
                     ? ShapeKind::Cdf
                     : ShapeKind::Density;
  coeffs.eta_floor = config.get_double_or("eta_floor", 1e-6);
  return coeffs;
}

}  // namespace

std::string run_surface(const RunConfig& config, const std::string& out_dir) {
  const MarketInputs in = load_market(config, "price_csv", "esg_csv");
  const Chain chain = read_chain_csv(config.get_string("chain_csv"));
  const QuoteSet quoteset = quotes_from_chain(chain, in.prices);
  const std::vector<double> lambdas = lambda_list(config);
  const std::string model_name = config.get_string_or("model", "plain");

  CalibConfig calib;
  calib.lambda_grid = lambda_grid(config);
  calib.sigma_lo = config.get_double_or("sigma_lo", 1e-4);
  calib.sigma_hi = config.get_double_or("sigma_hi", 5.0);
  calib.tol = config.get_double_or("tol", 1e-6);
  calib.dt = in.dt;
  calib.rf = in.rf;
  calib.theta_floor = config.get_double_or("theta_floor", 1e-8);
  calib.pd_path_cap = int(config.get_long_or("pd_path_cap", 22));

  std::vector<std::string> kinds;
  {
    const std::string raw = config.get_string_or("surfaces", "implied_lambda");
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) kinds.push_back(item);
    }
  }

  // Per-lambda parameter tables over the search grid.
  LambdaParamTable table;
  for (double lambda : calib.lambda_grid)
    table.params.push_back(estimate_at(in, lambda));

  std::deque<DriverSeries> pd_drivers;  // stable addresses for PdContext
  if (model_name == "pathdep") {
    const MarketInputs driver_in =
        load_market(config, "driver_price_csv", "driver_esg_csv");
    const bool explicit_coeffs =
        config.has("c1") && config.has("c2") && config.has("c3");
    FitOptions fit_opt;
    fit_opt.tol = config.get_double_or("fit_tol", 1e-10);
    fit_opt.max_evals = int(config.get_long_or("fit_max_evals", 4000));
    std::vector<std::array<double, 3>> warm;
    for (std::size_t i = 0; i < calib.lambda_grid.size(); ++i) {
      const double lambda = calib.lambda_grid[i];
      const EsgSeries driver_series = blend_at(driver_in, lambda);
      pd_drivers.push_back(standardize_driver(driver_series.r_lambda, in.dt));
      PdContext ctx;
      ctx.driver = &pd_drivers.back();
      ctx.convention = in.convention;
      const EsgSeries stock = blend_at(in, lambda);
      ctx.mu_r = std::accumulate(stock.r_lambda.begin(), stock.r_lambda.end(),
                                 0.0) /
                 (double(stock.size()) * in.dt);
      if (explicit_coeffs) {
        ctx.coeffs = coeffs_from(config);
        ctx.coeffs.c1 = config.get_double("c1");
        ctx.coeffs.c2 = config.get_double("c2");
        ctx.coeffs.c3 = config.get_double("c3");
      } else {
        if (stock.size() != pd_drivers.back().z.size())
          throw Error(ErrorCode::Alignment,
                      "stock and driver series must cover the same steps");
        const EtaCoeffs base = coeffs_from(config);
        const std::vector<double> realized =
            numeraire_prices(stock, in.prices.front().close);
        FitOptions opt = fit_opt;
        const FitResult fit = fit_coeffs(
            realized, in.prices.front().close, ctx.mu_r, pd_drivers.back(),
            in.convention, base.df_h, base.df_g, base.shape, opt, warm);
        ctx.coeffs = fit.coeffs;
        warm = {{fit.coeffs.c1, fit.coeffs.c2, fit.coeffs.c3}};
      }
      table.pd.push_back(ctx);
    }
  }

  std::vector<SurfaceOutput> outputs;
  auto sigma_surface_at = [&](double lambda) {
    ModelParams base = estimate_at(in, lambda);
    return map_cells(quoteset.quotes, [&calib, base](const OptionQuote& q) {
      return implied_sigma(q, base, calib);
    });
  };

  for (const std::string& kind : kinds) {
    if (kind == "implied_lambda") {
      const ModelKind mk = model_name == "pathdep" ? ModelKind::PathDependent
                                                   : ModelKind::Plain;
      SurfaceOutput out;
      out.name = "implied_lambda";
      out.surface = map_cells(quoteset.quotes,
                              [&table, &calib, mk](const OptionQuote& q) {
                                return implied_lambda(q, table, calib, mk);
                              });
      outputs.push_back(std::move(out));
    } else if (kind == "implied_sigma") {
      for (double lambda : lambdas) {
        SurfaceOutput out;
        out.name = "implied_sigma_l" + fmt_lambda(lambda);
        out.surface = sigma_surface_at(lambda);
        outputs.push_back(std::move(out));
      }
    } else if (kind == "bsm_sigma") {
      SurfaceOutput out;
      out.name = "bsm_sigma";
      out.surface =
          map_cells(quoteset.quotes, [&calib](const OptionQuote& q) {
            return implied_sigma_bsm(q, calib);
          });
      outputs.push_back(std::move(out));
    } else if (kind == "implied_delta") {
      for (double lambda : lambdas) {
        ModelParams base = estimate_at(in, lambda);
        SurfaceOutput out;
        out.name = "implied_delta_l" + fmt_lambda(lambda);
        out.surface = map_cells(quoteset.quotes,
                                [&calib, base](const OptionQuote& q) {
                                  return implied_delta(q, base, calib);
                                });
        outputs.push_back(std::move(out));
      }
    } else if (kind == "sigma_rel_change") {
      const Surface base = sigma_surface_at(0.0);
      for (double lambda : lambdas) {
        if (lambda == 0.0) continue;
        SurfaceOutput out;
        out.name = "sigma_rel_change_l" + fmt_lambda(lambda);
        out.surface =
            relative_change_surface(sigma_surface_at(lambda), base, &out.omitted);
        outputs.push_back(std::move(out));
      }
    } else if (kind == "sigma_vs_bsm") {
      const Surface bsm = map_cells(
          quoteset.quotes,
          [&calib](const OptionQuote& q) { return implied_sigma_bsm(q, calib); });
      for (double lambda : lambdas) {
        SurfaceOutput out;
        out.name = "sigma_vs_bsm_l" + fmt_lambda(lambda);
        out.surface =
            relative_change_surface(sigma_surface_at(lambda), bsm, &out.omitted);
        outputs.push_back(std::move(out));
      }
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown surface kind '" + kind + "'");
    }
  }

  const std::string hash = config.hash_hex();
  std::vector<StagedFile> files;
  std::ostringstream manifest;
  manifest << "config_hash=" << hash << "\n";
  manifest << "quote_date=" << format_date(quoteset.quote_date) << "\n";
  manifest << "quotes=" << quoteset.quotes.size()
           << " dropped_nonpositive=" << quoteset.dropped_nonpositive
           << " dropped_zero_steps=" << quoteset.dropped_zero_steps << "\n";
  for (const SurfaceOutput& out : outputs) {
    std::ostringstream csv;
    csv << "# config_hash=" << hash << "\n";
    csv << "T_days,moneyness,value,residual,status\n";
    char buf[160];
    for (const SurfaceCell& cell : out.surface.cells) {
      std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%s\n", cell.t_days,
                    cell.moneyness, cell.value, cell.residual,
                    cell_status_name(cell.status));
      csv << buf;
    }
    files.push_back({out.name + ".csv", csv.str()});
    manifest << surface_manifest_line(out);
  }
  files.push_back({"manifest.txt", manifest.str()});
  commit_files(out_dir, files);

  std::ostringstream report;
  report << "wrote " << outputs.size() << " surfaces and manifest to " << out_dir
         << "\n";
  for (const SurfaceOutput& out : outputs) report << surface_manifest_line(out);
  return report.str();
}

std::string run_fit_path(const RunConfig& config, const std::string& out_dir) {
  const MarketInputs in = load_market(config, "price_csv", "esg_csv");
  const MarketInputs driver_in =
      load_market(config, "driver_price_csv", "driver_esg_csv");
  const std::vector<double> lambdas = lambda_list(config);
  const EtaCoeffs base = coeffs_from(config);

  FitOptions fit_opt;
  fit_opt.tol = config.get_double_or("fit_tol", 1e-10);
  fit_opt.max_evals = int(config.get_long_or("fit_max_evals", 4000));

  const std::string hash = config.hash_hex();
  std::ostringstream coeffs_csv;
  coeffs_csv << "# config_hash=" << hash << "\n";
  coeffs_csv << "lambda,c1,c2,c3,residual,eta_floored,evals\n";

  std::vector<StagedFile> files;
  std::vector<std::array<double, 3>> warm;
  for (double lambda : lambdas) {
    const EsgSeries stock = blend_at(in, lambda);
    const EsgSeries driver_series = blend_at(driver_in, lambda);
    if (stock.dates != driver_series.dates)
      throw Error(ErrorCode::Alignment,
                  "stock and driver series must share step dates");
    const DriverSeries driver = standardize_driver(driver_series.r_lambda, in.dt);
    const double s0 = in.prices.front().close;
    const double mu_r =
        std::accumulate(stock.r_lambda.begin(), stock.r_lambda.end(), 0.0) /
        (double(stock.size()) * in.dt);
    const std::vector<double> realized = numeraire_prices(stock, s0);

    const FitResult fit =
        fit_coeffs(realized, s0, mu_r, driver, in.convention, base.df_h,
                   base.df_g, base.shape, fit_opt, warm);
    warm = {{fit.coeffs.c1, fit.coeffs.c2, fit.coeffs.c3}};

    coeffs_csv << fmt_lambda(lambda) << "," << fmt(fit.coeffs.c1) << ","
               << fmt(fit.coeffs.c2) << "," << fmt(fit.coeffs.c3) << ","
               << fmt(fit.residual) << "," << (fit.eta_floored ? "1" : "0")
               << "," << fit.evals << "\n";

    const std::vector<double> fitted =
        pd_model_prices(s0, mu_r, fit.coeffs, driver, in.convention);
    std::ostringstream path_csv;
    path_csv << "# config_hash=" << hash << "\n";
    path_csv << "date,realized,fitted\n";
    for (std::size_t k = 0; k < realized.size(); ++k)
      path_csv << format_date(stock.dates[k]) << "," << fmt(realized[k]) << ","
               << fmt(fitted[k]) << "\n";
    files.push_back({"fit_path_l" + fmt_lambda(lambda) + ".csv", path_csv.str()});
  }

  files.push_back({"coeffs.csv", coeffs_csv.str()});
  commit_files(out_dir, files);

  std::ostringstream report;
  report << "wrote coefficient table and " << lambdas.size()
         << " fitted paths to " << out_dir << "\n";
  return report.str();
}

std::string run_simulate_informed(const RunConfig& config) {
  const PricedModel model = resolve_params(config);
  const double steps_per_year = config.get_double_or("steps_per_year", 252.0);
  const double dt = 1.0 / steps_per_year;
  const double rf = config.get_double_or("rf_annual", 0.0);
  const double delta = config.get_double("delta");
  const std::int64_t paths = config.get_long_or("paths", 1000000);
  const std::uint64_t seed = std::uint64_t(config.get_long_or("seed", 12345));

  double n_contracts;
  if (config.has("n_contracts")) {
    n_contracts = config.get_double("n_contracts");
  } else if (model.params.convention == Convention::Arithmetic) {
    n_contracts = optimal_n_arith(
        n_delta_arith(delta, model.params.p),
        sharpe_theta(model.params, rf),
        config.get_double_or("theta_floor", 1e-8));
  } else {
    const InformedLogParams ip = informed_log_params(model.params, delta, rf, dt);
    n_contracts = ip.n;
  }

  const StrategyMoments moments = simulate_informed_strategy(
      model.params, delta, n_contracts, rf, dt, paths, seed);

  std::ostringstream report;
  report << "convention = "
         << (model.params.convention == Convention::Arithmetic ? "arith" : "log")
         << "\n"
         << "delta = " << fmt(delta) << "  n_contracts = " << fmt(n_contracts)
         << "  paths = " << paths << "  seed = " << seed << "\n"
         << "sample_mean = " << fmt(moments.mean) << "\n"
         << "sample_var = " << fmt(moments.var) << "\n";
  if (model.params.convention == Convention::Arithmetic) {
    const double nd = n_delta_arith(delta, model.params.p);
    const double mean = (model.params.mu + model.params.sigma * nd * n_contracts) * dt;
    const double var = model.params.sigma * model.params.sigma *
                       (1.0 + n_contracts * n_contracts) * dt;
    report << "analytic_mean = " << fmt(mean) << "\n"
           << "analytic_var = " << fmt(var) << "\n";
  }
  return report.str();
}

}  // namespace esgval
