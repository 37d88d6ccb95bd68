#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "esgval/binomial_engine.hpp"
#include "esgval/path_dependent.hpp"

using namespace esgval;

namespace {

const std::vector<double> kCloses = {100.0, 101.5, 100.8, 102.3, 101.9, 103.0};

std::vector<double> returns_of(const std::vector<double>& closes,
                               Convention conv) {
  std::vector<double> r;
  for (std::size_t k = 1; k < closes.size(); ++k)
    r.push_back(conv == Convention::Arithmetic
                    ? closes[k] / closes[k - 1] - 1.0
                    : std::log(closes[k] / closes[k - 1]));
  return r;
}

EtaCoeffs coeffs_of(double c1, double c2, double c3,
                    ShapeKind shape = ShapeKind::Density, double df_h = 5.0,
                    double df_g = 5.0) {
  EtaCoeffs c;
  c.c1 = c1;
  c.c2 = c2;
  c.c3 = c3;
  c.df_h = df_h;
  c.df_g = df_g;
  c.shape = shape;
  return c;
}

}  // namespace

TEST_CASE("t density against frozen references") {
  // Reference values from an independent implementation, 16 digits.
  const struct { double df, x, pdf; } rows[] = {
      {5, 0.0, 3.7960668982249440e-01},  {5, 0.5, 3.2791853132274645e-01},
      {5, 1.0, 2.1967979735098050e-01},  {5, 2.0, 6.5090310326216469e-02},
      {5, -1.3, 1.5847673572898244e-01}, {5, 3.7, 7.2680175325693930e-03},
      {50, 0.0, 3.9695267973111026e-01}, {50, 0.5, 3.4954586046517561e-01},
      {50, 1.0, 2.3957106205868811e-01}, {50, 2.0, 5.5774151649800451e-02},
      {50, -1.3, 1.7006199849026504e-01},{50, 3.7, 8.2919562516537619e-04},
  };
  for (const auto& r : rows)
    CHECK(student_t_pdf(r.x, r.df) == doctest::Approx(r.pdf).epsilon(1e-13));

  for (double df : {1.0, 5.0, 50.0, 120.0})
    for (double x : {0.1, 0.9, 2.4})
      CHECK(student_t_pdf(-x, df) == doctest::Approx(student_t_pdf(x, df)).epsilon(1e-15));
  CHECK_THROWS_AS(student_t_pdf(0.0, 0.0), Error);
}

TEST_CASE("t distribution function against frozen references") {
  const struct { double df, x, cdf; } rows[] = {
      {5, 0.5, 6.8085056417953549e-01},  {5, 1.0, 8.1839126617543867e-01},
      {5, 2.0, 9.4903026058507090e-01},  {5, -1.3, 1.2515031708533858e-01},
      {5, 3.7, 9.9300029651215038e-01},  {50, 0.5, 6.9036571624411436e-01},
      {50, 1.0, 8.3893717744987761e-01}, {50, 2.0, 9.7452646563115330e-01},
      {50, -1.3, 9.9781067763926812e-02},{50, 3.7, 9.9973145507237948e-01},
  };
  for (const auto& r : rows)
    CHECK(student_t_cdf(r.x, r.df) == doctest::Approx(r.cdf).epsilon(1e-12));

  CHECK(student_t_cdf(0.0, 5.0) == 0.5);
  // Two-sided 97.5% quantiles.
  CHECK(student_t_cdf(2.570581835636197, 5.0) == doctest::Approx(0.975).epsilon(1e-10));
  CHECK(student_t_cdf(2.008559109920819, 50.0) == doctest::Approx(0.975).epsilon(1e-9));
  for (double x : {0.2, 1.7, 4.4})
    CHECK(student_t_cdf(-x, 5.0) ==
          doctest::Approx(1.0 - student_t_cdf(x, 5.0)).epsilon(1e-14));

  // Monotone in x.
  double prev = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    const double c = student_t_cdf(x, 5.0);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("t density integrates to its distribution function") {
  // Composite Simpson over a wide bracket, compared against the cdf.
  for (double df : {5.0, 50.0}) {
    const double lo = -60.0, hi = 2.0;
    const int n = 400000;
    const double h = (hi - lo) / n;
    double acc = student_t_pdf(lo, df) + student_t_pdf(hi, df);
    for (int i = 1; i < n; ++i)
      acc += student_t_pdf(lo + h * i, df) * (i % 2 == 1 ? 4.0 : 2.0);
    acc *= h / 3.0;
    CHECK(acc == doctest::Approx(student_t_cdf(hi, df)).epsilon(1e-7));
  }
}

TEST_CASE("driver standardization has exact two-point moments") {
  const auto r = returns_of(kCloses, Convention::Arithmetic);
  const auto d = standardize_driver(r, 1.0 / 252.0);
  CHECK(d.p_m == doctest::Approx(0.6).epsilon(1e-15));
  REQUIRE(d.z.size() == 5);
  const double expected_z[] = {8.1649658092772603e-01, -1.2247448713915889e+00,
                               8.1649658092772603e-01, -1.2247448713915889e+00,
                               8.1649658092772603e-01};
  for (int k = 0; k < 5; ++k)
    CHECK(d.z[k] == doctest::Approx(expected_z[k]).epsilon(1e-14));
  const double expected_x[] = {0.0, 5.1434449987363975e-02, -2.5717224993681981e-02,
                               2.5717224993681995e-02, -5.1434449987363962e-02,
                               1.3877787807814457e-17};
  for (int k = 0; k <= 5; ++k)
    CHECK(std::abs(d.x[k] - expected_x[k]) < 1e-15);

  // p_m*pu - (1-p_m)*pd = 0 and p_m*pu^2 + (1-p_m)*pd^2 = 1 exactly, for any
  // return sample.
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> ur(-0.03, 0.035);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> rr(20 + rep % 30);
    for (auto& v : rr) v = ur(rng);
    const auto dd = standardize_driver(rr, 1.0 / 252.0);
    const double pu = std::sqrt((1.0 - dd.p_m) / dd.p_m);
    const double pd = std::sqrt(dd.p_m / (1.0 - dd.p_m));
    CHECK(std::abs(dd.p_m * pu - (1.0 - dd.p_m) * pd) < 1e-12);
    CHECK(std::abs(dd.p_m * pu * pu + (1.0 - dd.p_m) * pd * pd - 1.0) < 1e-12);
    for (double z : dd.z) CHECK((z == pu || z == -pd));
  }

  CHECK_THROWS_AS(standardize_driver({0.01}, 1.0 / 252.0), Error);
  CHECK_THROWS_AS(standardize_driver({0.01, 0.01, 0.01}, 1.0 / 252.0), Error);
  CHECK_THROWS_AS(standardize_driver(r, 0.0), Error);
}

TEST_CASE("volatility response along the frozen driver") {
  const auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic),
                                    1.0 / 252.0);
  const auto coeffs = coeffs_of(0.002, 0.15, -0.05);
  const auto path = eta_path(coeffs, d);
  REQUIRE(path.values.size() == 5);
  const double expected[] = {3.9960668982249439e-02, 3.9870381995684281e-02,
                             3.9938079796733632e-02, 3.9938079440919261e-02,
                             3.9870382470103445e-02};
  for (int k = 0; k < 5; ++k)
    CHECK(path.values[k] == doctest::Approx(expected[k]).epsilon(1e-13));
  CHECK_FALSE(path.floored);

  // Same coefficients with distribution-function shapes.
  const auto cdf_path = eta_path(coeffs_of(0.002, 0.15, -0.05, ShapeKind::Cdf), d);
  const double expected_cdf[] = {5.1999999999999998e-02, 5.4927180586463405e-02,
                                 5.0531955090204139e-02, 5.3462233939206433e-02,
                                 4.9068945433151684e-02};
  for (int k = 0; k < 5; ++k)
    CHECK(cdf_path.values[k] == doctest::Approx(expected_cdf[k]).epsilon(1e-13));
}

TEST_CASE("response values are floored and the floor is flagged") {
  bool floored = false;
  const auto coeffs = coeffs_of(-1.0, 0.001, 0.0);
  const double v = eta_shape(coeffs, 0.0, 0.0, &floored);
  CHECK(v == coeffs.eta_floor);
  CHECK(floored);

  floored = false;
  eta_shape(coeffs_of(0.01, 0.0, 0.0), 0.3, 0.1, &floored);
  CHECK_FALSE(floored);
}

TEST_CASE("response at step k never looks past step k") {
  auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic),
                              1.0 / 252.0);
  const auto coeffs = coeffs_of(0.004, 0.08, 0.03);
  const auto before = eta_path(coeffs, d);
  // Tampering with the path strictly after step k must leave values[0..k]
  // untouched: values[k] reads x[0..k] only.
  auto tampered = d;
  tampered.x[4] = 9.9;
  tampered.x[5] = -3.3;
  const auto after = eta_path(coeffs, tampered);
  for (int k = 0; k <= 3; ++k) CHECK(after.values[k] == before.values[k]);
  CHECK(after.values[4] != before.values[4]);
}

TEST_CASE("path-dependent steps delegate to the shared move constructors") {
  const double mu_r = 0.06, eta = 0.0399, p_m = 0.6, rf = 0.015, dt = 1.0 / 252.0;
  auto arith = pd_moves(mu_r, eta, p_m, rf, dt, Convention::Arithmetic);
  ModelParams mp;
  mp.mu = mu_r;
  mp.sigma = eta;
  mp.p = p_m;
  auto ref = moves_arithmetic(mp, rf, dt);
  CHECK(arith.u == ref.u);
  CHECK(arith.d == ref.d);
  CHECK(arith.q == ref.q);
  // Exact martingale shift identity carried over from the shared form.
  const double theta = (mu_r - rf) / eta;
  CHECK(std::abs(arith.q - (p_m - theta * std::sqrt(p_m * (1.0 - p_m) * dt))) < 1e-12);

  auto lg = pd_moves(mu_r, eta, p_m, rf, dt, Convention::Log);
  auto lref = moves_log_return(mu_r, eta, p_m, rf, dt);
  CHECK(lg.u == lref.u);
  CHECK(lg.d == lref.d);
  CHECK(lg.q == lref.q);
  CHECK(std::abs(lg.q * std::exp(lg.u) + (1.0 - lg.q) * std::exp(lg.d) -
                 std::exp(rf * dt)) < 1e-15);
}

TEST_CASE("conditioned model path matches the frozen references") {
  const double dt = 1.0 / 252.0, mu_r = 0.06;
  const auto coeffs = coeffs_of(0.002, 0.15, -0.05);
  {
    const auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic), dt);
    const auto path = pd_model_prices(100.0, mu_r, coeffs, d, Convention::Arithmetic);
    const double expected[] = {1.002293450268e+02, 9.994489700068e+01,
                               1.001739995293e+02, 9.988918536618e+01,
                               1.001178123761e+02};
    REQUIRE(path.size() == 5);
    for (int k = 0; k < 5; ++k)
      CHECK(path[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  }
  {
    const auto d = standardize_driver(returns_of(kCloses, Convention::Log), dt);
    const auto path = pd_model_prices(100.0, mu_r, coeffs, d, Convention::Log);
    const double expected[] = {1.002296082237e+02, 9.994556269781e+01,
                               1.001749295395e+02, 9.989051724345e+01,
                               1.001194091464e+02};
    for (int k = 0; k < 5; ++k)
      CHECK(path[k] == doctest::Approx(expected[k]).epsilon(1e-12));
  }
  // An arithmetic model step at or below -1 is rejected.
  auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic), dt);
  CHECK_THROWS_AS(pd_model_prices(100.0, -300.0, coeffs_of(20.0, 0.0, 0.0), d,
                                  Convention::Arithmetic),
                  Error);
}

TEST_CASE("conditioned option prices match independent path enumeration") {
  const double dt = 1.0 / 252.0;
  LatticeSpec spec;
  spec.s0 = 100.0;
  spec.strike = 100.0;
  spec.steps = 2;
  spec.dt = dt;
  spec.rf = 0.015;
  const auto coeffs = coeffs_of(0.002, 0.15, -0.05);

  const auto da = standardize_driver(returns_of(kCloses, Convention::Arithmetic), dt);
  auto pa = pd_price_european(spec, 0.06, coeffs, da, Convention::Arithmetic);
  CHECK(pa.price == doctest::Approx(1.465351744315e-01).epsilon(1e-11));

  const auto dl = standardize_driver(returns_of(kCloses, Convention::Log), dt);
  auto pl = pd_price_european(spec, 0.06, coeffs, dl, Convention::Log);
  CHECK(pl.price == doctest::Approx(1.463761227091e-01).epsilon(1e-11));

  spec.steps = 5;
  spec.strike = 98.0;
  auto pa5 = pd_price_european(spec, 0.06, coeffs, da, Convention::Arithmetic);
  CHECK(pa5.price == doctest::Approx(2.029161459057e+00).epsilon(1e-11));
  auto pl5 = pd_price_european(spec, 0.06, coeffs, dl, Convention::Log);
  CHECK(pl5.price == doctest::Approx(2.029162326819e+00).epsilon(1e-11));
}

TEST_CASE("constant response collapses onto the plain per-step trees") {
  const double dt = 1.0 / 252.0;
  const auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic), dt);
  const auto coeffs = coeffs_of(0.21, 0.0, 0.0);  // eta == c1 at every step
  LatticeSpec spec;
  spec.s0 = 100.0;
  spec.strike = 99.0;
  spec.steps = 5;
  spec.dt = dt;
  spec.rf = 0.02;

  for (Convention conv : {Convention::Arithmetic, Convention::Log}) {
    const auto pd = pd_price_european(spec, 0.07, coeffs, d, conv);
    const auto m = pd_moves(0.07, 0.21, d.p_m, spec.rf, dt, conv);
    const auto plain = price_path_recursion(
        spec, std::vector<StepMoves>(5, m), conv);
    CHECK(pd.price == plain.price);  // identical code path, bit for bit
  }
}

TEST_CASE("zero strike keeps the conditioned tree a martingale") {
  const double dt = 1.0 / 252.0;
  const auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic), dt);
  LatticeSpec spec;
  spec.s0 = 77.0;
  spec.strike = 0.0;
  spec.steps = 5;
  spec.dt = dt;
  spec.rf = 0.0152;
  for (Convention conv : {Convention::Arithmetic, Convention::Log}) {
    const auto res =
        pd_price_european(spec, 0.11, coeffs_of(0.01, 0.2, 0.1), d, conv);
    CHECK(res.price == doctest::Approx(77.0).epsilon(1e-12));
  }
}

TEST_CASE("deep conditioned trees fall back to the level lattice") {
  const double dt = 1.0 / 252.0;
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> ur(-0.02, 0.022);
  std::vector<double> r(30);
  for (auto& v : r) v = ur(rng);
  const auto d = standardize_driver(r, dt);

  LatticeSpec spec;
  spec.s0 = 100.0;
  spec.strike = 100.0;
  spec.steps = 25;  // above the exhaustive-path cap
  spec.dt = dt;
  spec.rf = 0.01;
  const auto res = pd_price_european(spec, 0.05, coeffs_of(0.01, 0.1, 0.05), d,
                                     Convention::Log, 22);
  CHECK(std::isfinite(res.price));
  CHECK(res.price > 0.0);

  // The lattice value approximates the exact expectation: compare on a depth
  // where both run.
  spec.steps = 10;
  const auto exact = pd_price_european(spec, 0.05, coeffs_of(0.01, 0.1, 0.05), d,
                                       Convention::Log, 22);
  const auto approx = pd_price_european(spec, 0.05, coeffs_of(0.01, 0.1, 0.05), d,
                                        Convention::Log, 5);
  CHECK(approx.price ==
        doctest::Approx(exact.price).epsilon(0.02));  // responses vary mildly

  spec.steps = 40;
  CHECK_THROWS_AS(
      pd_price_european(spec, 0.05, coeffs_of(0.01, 0.1, 0.05), d,
                        Convention::Arithmetic, 22),
      Error);  // driver shorter than the option
  spec.steps = 10;
  spec.dt = 1.0 / 52.0;
  CHECK_THROWS_AS(
      pd_price_european(spec, 0.05, coeffs_of(0.01, 0.1, 0.05), d,
                        Convention::Arithmetic, 22),
      Error);  // step-length mismatch with the driver
}

TEST_CASE("coefficient fit recovers a self-generated path") {
  const double dt = 1.0 / 252.0, mu_r = 0.05;
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> ur(-0.015, 0.016);
  std::vector<double> r(60);
  for (auto& v : r) v = ur(rng);
  const auto d = standardize_driver(r, dt);

  for (Convention conv : {Convention::Arithmetic, Convention::Log}) {
    const auto truth = coeffs_of(0.01, 0.004, -0.002);
    const auto stock = pd_model_prices(100.0, mu_r, truth, d, conv);
    const auto fit = fit_coeffs(stock, 100.0, mu_r, d, conv, 5.0, 5.0,
                                ShapeKind::Density);
    CHECK(fit.residual < 1e-10);
    const auto refit = pd_model_prices(100.0, mu_r, fit.coeffs, d, conv);
    for (std::size_t k = 0; k < stock.size(); ++k)
      CHECK(std::abs(refit[k] - stock[k]) < 1e-5);
  }
}

TEST_CASE("fit with vanishing shape terms recovers the constant response") {
  const double dt = 1.0 / 252.0, mu_r = 0.03;
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> ur(-0.01, 0.011);
  std::vector<double> r(80);
  for (auto& v : r) v = ur(rng);
  const auto d = standardize_driver(r, dt);

  const auto truth = coeffs_of(0.012, 0.0, 0.0);
  const auto stock = pd_model_prices(50.0, mu_r, truth, d, Convention::Log);
  const auto fit = fit_coeffs(stock, 50.0, mu_r, d, Convention::Log, 5.0, 5.0,
                              ShapeKind::Density);
  CHECK(fit.residual < 1e-10);
  // The response path itself is pinned down even where individual
  // coefficients trade off against each other.
  const auto eta_true = eta_path(truth, d);
  const auto eta_fit = eta_path(fit.coeffs, d);
  for (std::size_t k = 0; k < eta_true.values.size(); ++k)
    CHECK(eta_fit.values[k] == doctest::Approx(eta_true.values[k]).epsilon(5e-3));
}

TEST_CASE("fit input validation") {
  const auto d = standardize_driver(returns_of(kCloses, Convention::Arithmetic),
                                    1.0 / 252.0);
  CHECK_THROWS_AS(fit_coeffs({100.0, 101.0}, 100.0, 0.05, d,
                             Convention::Arithmetic, 5.0, 5.0, ShapeKind::Density),
                  Error);
  std::vector<double> r3 = {0.01, -0.01, 0.02};
  const auto d3 = standardize_driver(r3, 1.0 / 252.0);
  CHECK_THROWS_AS(fit_coeffs({100.0, 101.0, 100.5}, 100.0, 0.05, d3,
                             Convention::Arithmetic, 5.0, 5.0, ShapeKind::Density),
                  Error);
}

TEST_CASE("fit with distribution-function shapes round trips") {
  const double dt = 1.0 / 252.0, mu_r = 0.04;
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> ur(-0.012, 0.013);
  std::vector<double> r(50);
  for (auto& v : r) v = ur(rng);
  const auto d = standardize_driver(r, dt);

  const auto truth = coeffs_of(0.008, 0.006, -0.004, ShapeKind::Cdf, 50.0, 50.0);
  const auto stock = pd_model_prices(200.0, mu_r, truth, d, Convention::Arithmetic);
  const auto fit = fit_coeffs(stock, 200.0, mu_r, d, Convention::Arithmetic,
                              50.0, 50.0, ShapeKind::Cdf);
  CHECK(fit.residual < 1e-9);
  CHECK(fit.coeffs.shape == ShapeKind::Cdf);
}
