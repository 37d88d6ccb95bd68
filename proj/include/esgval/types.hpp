#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace esgval {

using Date = std::chrono::sys_days;

enum class Convention { Arithmetic, Log };

enum class PayoffKind { EuropeanCall, EuropeanPut };

enum class ErrorCode {
  InvalidArgument,  // bad inputs, unknown config keys, malformed requests
  Parse,            // malformed input files
  Alignment,        // series cannot be aligned (dates, ESG coverage)
  Domain,           // parameter outside its mathematical domain
  Degenerate,       // degenerate data (zero variance, empty series)
  Singular,         // singular configuration (zero Sharpe ratio, ...)
  Numeric,          // numerical failure (overflow, non-finite result)
  Io,               // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Drift/volatility/up-probability of one binomial step family.
// mu and sigma are per unit time; p is the physical up-move probability.
// For the log convention mu is the price drift, i.e. mean log return plus
// sigma^2/2.
struct ModelParams {
  double mu = 0.0;
  double sigma = 0.0;
  double p = 0.5;
  Convention convention = Convention::Arithmetic;
};

// One-step move pair with its risk-neutral up probability.
// Arithmetic convention: gross factors are 1+u and 1+d.
// Log convention: gross factors are e^u and e^d.
struct StepMoves {
  double u = 0.0;
  double d = 0.0;
  double q = 0.5;
  double p = 0.5;
};

struct LatticeSpec {
  double s0 = 1.0;
  double strike = 1.0;
  int steps = 1;
  double dt = 1.0 / 252.0;        // uniform step length
  double rf = 0.0;                // risk-free rate per unit time
  std::vector<double> dt_steps;   // optional per-step lengths (exact path evaluation)
  std::vector<double> rf_steps;   // optional per-step rates
  PayoffKind payoff = PayoffKind::EuropeanCall;

  bool uniform() const { return dt_steps.empty() && rf_steps.empty(); }
};

struct PricingResult {
  double price = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  bool arb_violation = false;  // some step had q outside [0,1]
};

// Blended return series: r_lambda = lambda*e + (1-lambda)*r0 per step.
struct EsgSeries {
  std::vector<Date> dates;       // return dates (second price date onwards)
  std::vector<double> r0;        // financial returns per step
  std::vector<double> e;         // normalized ESG increments per step
  std::vector<double> r_lambda;  // blended returns
  double lambda = 0.0;
  Convention convention = Convention::Arithmetic;

  std::size_t size() const { return r_lambda.size(); }
};

struct SeriesStats {
  double mean = 0.0;   // per-step mean of r_lambda
  double stdev = 0.0;  // per-step standard deviation
  double sharpe = 0.0;
  double mdd = 0.0;    // maximum drawdown as a fraction of the running peak
};

}  // namespace esgval
