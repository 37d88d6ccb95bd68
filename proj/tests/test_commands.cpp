#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "esgval/commands.hpp"

using namespace esgval;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) {
  const char* dir = std::getenv("ESGVAL_FIXTURE_DIR");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

std::string out_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("esgval_cmd_" + std::to_string(::getpid())) / name;
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

RunConfig market_config(const std::string& extra = "") {
  return RunConfig::from_text("price_csv = " + fixture("prices_a.csv") +
                              "\nesg_csv = " + fixture("esg_a.csv") +
                              "\nconvention = arith\nrf_annual = 0.02\n" + extra);
}

std::vector<double> fixture_closes() {
  std::vector<double> closes;
  for (const std::string& line : data_lines(slurp(fixture("prices_a.csv")))) {
    const auto f = fields_of(line);
    if (f[0] == "date") continue;
    closes.push_back(std::strtod(f[1].c_str(), nullptr));
  }
  return closes;
}

}  // namespace

TEST_CASE("esg-price writes rescaled numeraire paths per blend weight") {
  const RunConfig cfg = market_config("lambda = 0,0.5\n");
  const std::string dir = out_dir("esg_price");
  const std::string report = run_esg_price(cfg, dir);
  CHECK(report.find("esg_prices.csv") != std::string::npos);
  CHECK(report.find("2 lambda values, 28 steps each") != std::string::npos);

  const std::string text = slurp(dir + "/esg_prices.csv");
  CHECK(text.rfind("# config_hash=" + cfg.hash_hex(), 0) == 0);
  const auto lines = data_lines(text);
  REQUIRE(lines.size() == 1 + 2 * 28);
  CHECK(lines[0] == "date,lambda,price");

  // With weight zero the numeraire path is the close series rescaled by its
  // first value.
  const auto closes = fixture_closes();
  REQUIRE(closes.size() == 29);
  for (std::size_t k = 0; k < 28; ++k) {
    const auto f = fields_of(lines[1 + k]);
    REQUIRE(f.size() == 3);
    CHECK(f[1] == "0.00");
    const double price = std::strtod(f[2].c_str(), nullptr);
    CHECK(price == doctest::Approx(closes[k + 1] / closes[0]).epsilon(1e-10));
  }
  CHECK(fields_of(lines[1])[0] == "2024-01-03");
  CHECK(fields_of(lines[28])[0] == "2024-02-09");
  // Second block carries the other weight.
  CHECK(fields_of(lines[29])[1] == "0.50");
}

TEST_CASE("estimate writes per-convention parameter tables") {
  const RunConfig cfg = market_config("lambda = 0,0.35\n");
  const std::string dir = out_dir("estimate");
  const std::string report = run_estimate(cfg, dir);
  CHECK(report.find("params.csv") != std::string::npos);
  CHECK(report.find("(4 rows)") != std::string::npos);

  const auto lines = data_lines(slurp(dir + "/params.csv"));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "convention,lambda,mu_per_step,sigma_per_step,p,mu_annual,sigma_annual");

  // The weight-zero arithmetic row must reproduce plain sample moments of the
  // close-to-close returns.
  const auto closes = fixture_closes();
  std::vector<double> r;
  for (std::size_t k = 1; k < closes.size(); ++k)
    r.push_back(closes[k] / closes[k - 1] - 1.0);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / double(r.size());
  double ss = 0.0;
  for (double v : r) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / double(r.size() - 1));
  const double frac =
      double(std::count_if(r.begin(), r.end(), [](double v) { return v >= 0.0; })) /
      double(r.size());

  const auto f = fields_of(lines[1]);
  REQUIRE(f.size() == 7);
  CHECK(f[0] == "arith");
  CHECK(f[1] == "0.00");
  CHECK(std::strtod(f[2].c_str(), nullptr) == doctest::Approx(mean).epsilon(1e-9));
  CHECK(std::strtod(f[3].c_str(), nullptr) == doctest::Approx(sd).epsilon(1e-9));
  CHECK(std::strtod(f[4].c_str(), nullptr) == doctest::Approx(frac).epsilon(1e-9));
  // Annualized columns scale the per-step ones.
  CHECK(std::strtod(f[5].c_str(), nullptr) ==
        doctest::Approx(mean * 252.0).epsilon(1e-9));
  CHECK(std::strtod(f[6].c_str(), nullptr) ==
        doctest::Approx(sd * std::sqrt(252.0)).epsilon(1e-9));

  CHECK(fields_of(lines[3])[0] == "log");
}

TEST_CASE("price reports a plain lattice value from explicit parameters") {
  const RunConfig cfg = RunConfig::from_text(
      "s0 = 100\nstrike = 100\nexpiry_days = 252\nmu = 0.05\nsigma = 0.2\n"
      "p = 0.5\nconvention = log\nrf_annual = 0.05\n");
  const std::string report = run_price(cfg);
  CHECK(report.find("model = plain") != std::string::npos);
  CHECK(report.find("convention = log") != std::string::npos);
  CHECK(report.find("arb_violation = false") != std::string::npos);
  CHECK(report.find("dividend_yield = n/a") != std::string::npos);

  // Fine log-return tree at the risk-neutral drift sits next to the
  // closed-form lognormal value 10.4506.
  const auto pos = report.find("price = ");
  REQUIRE(pos != std::string::npos);
  const double price = std::strtod(report.c_str() + pos + 8, nullptr);
  CHECK(price == doctest::Approx(10.4506).epsilon(2e-4));
}

TEST_CASE("price covers the informed and conditioned models") {
  {
    const RunConfig cfg = RunConfig::from_text(
        "s0 = 100\nstrike = 100\nexpiry_days = 40\nmu = 0.09\nsigma = 0.28\n"
        "p = 0.52\nconvention = arith\nrf_annual = 0.02\nmodel = informed\n"
        "delta = 0.8\n");
    const std::string report = run_price(cfg);
    CHECK(report.find("model = informed") != std::string::npos);
    CHECK(report.find("(informed)") != std::string::npos);
    const auto pos = report.find("price = ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::strtod(report.c_str() + pos + 8, nullptr) > 0.0);
  }
  {
    const RunConfig cfg = RunConfig::from_text(
        "s0 = 108\nstrike = 108\nexpiry_days = 10\nmu = 0.06\nsigma = 0.2\n"
        "p = 0.5\nconvention = arith\nrf_annual = 0.02\nmodel = pathdep\n"
        "driver_price_csv = " + fixture("prices_m.csv") +
        "\ndriver_esg_csv = " + fixture("esg_m.csv") +
        "\nc1 = 0.01\nc2 = 0.05\nc3 = -0.02\ndf = 5\n");
    const std::string report = run_price(cfg);
    CHECK(report.find("model = pathdep") != std::string::npos);
    const auto pos = report.find("price = ");
    REQUIRE(pos != std::string::npos);
    const double price = std::strtod(report.c_str() + pos + 8, nullptr);
    CHECK(price > 0.0);
    CHECK(std::isfinite(price));
  }
  CHECK_THROWS_AS(run_price(RunConfig::from_text(
                      "s0 = 100\nstrike = 100\nexpiry_days = 10\nmu = 0.05\n"
                      "sigma = 0.2\np = 0.5\nmodel = teleporting\n")),
                  Error);
  CHECK_THROWS_AS(run_price(RunConfig::from_text(
                      "s0 = 100\nexpiry_days = 10\nmu = 0.05\nsigma = 0.2\n"
                      "p = 0.5\n")),
                  Error);
}

TEST_CASE("surface recovers the blend weight behind a generated chain") {
  const RunConfig cfg = market_config("chain_csv = " + fixture("chain.csv") +
                                      "\nsurfaces = implied_lambda\n");
  const std::string dir = out_dir("surface_lambda");
  const std::string report = run_surface(cfg, dir);
  CHECK(report.find("wrote 1 surfaces") != std::string::npos);
  CHECK(report.find("cells=5 converged=5") != std::string::npos);

  const std::string manifest = slurp(dir + "/manifest.txt");
  CHECK(manifest.find("quotes=5 dropped_nonpositive=1 dropped_zero_steps=1") !=
        std::string::npos);
  CHECK(manifest.find("config_hash=" + cfg.hash_hex()) != std::string::npos);

  const auto lines = data_lines(slurp(dir + "/implied_lambda.csv"));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "T_days,moneyness,value,residual,status");
  int prev_t = 0;
  double prev_m = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields_of(lines[i]);
    REQUIRE(f.size() == 5);
    const int t = int(std::strtol(f[0].c_str(), nullptr, 10));
    const double m = std::strtod(f[1].c_str(), nullptr);
    CHECK(t >= prev_t);
    if (t == prev_t) CHECK(m > prev_m);
    prev_t = t;
    prev_m = m;
    CHECK(std::strtod(f[2].c_str(), nullptr) == 0.35);
    CHECK(std::strtod(f[3].c_str(), nullptr) < 1e-18);
    CHECK(f[4] == "converged");
  }
}

TEST_CASE("surface families and deterministic reruns") {
  const RunConfig cfg = market_config(
      "chain_csv = " + fixture("chain.csv") +
      "\nsurfaces = bsm_sigma,implied_sigma\nlambda = 0,0.5\n");
  const std::string dir1 = out_dir("surface_multi_1");
  const std::string dir2 = out_dir("surface_multi_2");
  const std::string report = run_surface(cfg, dir1);
  CHECK(report.find("wrote 3 surfaces") != std::string::npos);
  for (const char* name :
       {"bsm_sigma.csv", "implied_sigma_l0.00.csv", "implied_sigma_l0.50.csv",
        "manifest.txt"})
    CHECK(fs::exists(fs::path(dir1) / name));

  // Five data rows per surface, statuses drawn from the documented set.
  for (const char* name : {"bsm_sigma.csv", "implied_sigma_l0.00.csv"}) {
    const auto lines = data_lines(slurp(dir1 + "/" + name));
    REQUIRE(lines.size() == 6);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = fields_of(lines[i]);
      REQUIRE(f.size() == 5);
      CHECK((f[4] == "converged" || f[4] == "boundary" || f[4] == "singular" ||
             f[4] == "empty"));
    }
  }
  // The closed-form quotes were generated by a tree, so implied vols converge
  // somewhere sensible rather than at the search edges.
  {
    const auto lines = data_lines(slurp(dir1 + "/bsm_sigma.csv"));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = fields_of(lines[i]);
      CHECK(f[4] == "converged");
      const double v = std::strtod(f[2].c_str(), nullptr);
      CHECK(v > 0.01);
      CHECK(v < 1.0);
    }
  }

  run_surface(cfg, dir2);
  for (const char* name : {"bsm_sigma.csv", "implied_sigma_l0.00.csv",
                           "implied_sigma_l0.50.csv", "manifest.txt"})
    CHECK(slurp(dir1 + "/" + name) == slurp(dir2 + "/" + name));

  CHECK_THROWS_AS(
      run_surface(market_config("chain_csv = " + fixture("chain.csv") +
                                "\nsurfaces = quantum_smile\n"),
                  out_dir("surface_bad")),
      Error);
}

TEST_CASE("fit-path writes coefficients and fitted paths") {
  const RunConfig cfg = market_config(
      "driver_price_csv = " + fixture("prices_m.csv") +
      "\ndriver_esg_csv = " + fixture("esg_m.csv") +
      "\nlambda = 0\ndf = 5\nfit_max_evals = 2000\n");
  const std::string dir = out_dir("fit_path");
  const std::string report = run_fit_path(cfg, dir);
  CHECK(report.find("1 fitted paths") != std::string::npos);

  const auto coeff_lines = data_lines(slurp(dir + "/coeffs.csv"));
  REQUIRE(coeff_lines.size() == 2);
  CHECK(coeff_lines[0] == "lambda,c1,c2,c3,residual,eta_floored,evals");
  const auto cf = fields_of(coeff_lines[1]);
  REQUIRE(cf.size() == 7);
  CHECK(cf[0] == "0.00");
  const double residual = std::strtod(cf[4].c_str(), nullptr);
  CHECK(std::isfinite(residual));
  CHECK(residual >= 0.0);

  const auto path_lines = data_lines(slurp(dir + "/fit_path_l0.00.csv"));
  REQUIRE(path_lines.size() == 1 + 28);
  CHECK(path_lines[0] == "date,realized,fitted");
  const auto closes = fixture_closes();
  for (std::size_t k = 1; k < path_lines.size(); ++k) {
    const auto f = fields_of(path_lines[k]);
    REQUIRE(f.size() == 3);
    // Realized column is the close path itself (the series starts at the
    // first close).
    CHECK(std::strtod(f[1].c_str(), nullptr) ==
          doctest::Approx(closes[k]).epsilon(1e-10));
    CHECK(std::isfinite(std::strtod(f[2].c_str(), nullptr)));
  }

  // Stock and driver series must cover the same step dates.
  const std::string shorter = out_dir("fit_path_short") + "/prices_short.csv";
  {
    std::ofstream out(shorter);
    const auto all = data_lines(slurp(fixture("prices_m.csv")));
    for (std::size_t i = 0; i + 1 < all.size(); ++i) out << all[i] << "\n";
  }
  CHECK_THROWS_AS(
      run_fit_path(market_config("driver_price_csv = " + shorter +
                                 "\ndriver_esg_csv = " + fixture("esg_m.csv") +
                                 "\nlambda = 0\n"),
                   out_dir("fit_path_err")),
      Error);
}

TEST_CASE("informed strategy simulation reports against analytics") {
  const RunConfig cfg = RunConfig::from_text(
      "mu = 0.09\nsigma = 0.28\np = 0.52\nconvention = arith\ns0 = 100\n"
      "rf_annual = 0.02\ndelta = 0.5\npaths = 40000\nseed = 42\n");
  const std::string report = run_simulate_informed(cfg);
  CHECK(report.find("convention = arith") != std::string::npos);
  CHECK(report.find("paths = 40000") != std::string::npos);

  auto value_after = [&](const std::string& key) {
    const auto pos = report.find(key + " = ");
    REQUIRE(pos != std::string::npos);
    return std::strtod(report.c_str() + pos + key.size() + 3, nullptr);
  };
  const double sample_mean = value_after("sample_mean");
  const double sample_var = value_after("sample_var");
  const double analytic_mean = value_after("analytic_mean");
  const double analytic_var = value_after("analytic_var");
  // Monte Carlo agreement: the mean within a few standard errors, the
  // variance loosely (its own sampling noise plus the small-step bias).
  const double se = std::sqrt(analytic_var / 40000.0);
  CHECK(std::abs(sample_mean - analytic_mean) < 5.0 * se);
  CHECK(sample_var == doctest::Approx(analytic_var).epsilon(0.05));

  const RunConfig lcfg = RunConfig::from_text(
      "mu = 0.10\nsigma = 0.25\np = 0.55\nconvention = log\ns0 = 100\n"
      "rf_annual = 0.03\ndelta = 0.1\npaths = 5000\nseed = 7\n");
  const std::string lreport = run_simulate_informed(lcfg);
  CHECK(lreport.find("convention = log") != std::string::npos);
  CHECK(lreport.find("sample_var = ") != std::string::npos);
}
