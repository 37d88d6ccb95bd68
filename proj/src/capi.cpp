#include "esgval.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "esgval/binomial_engine.hpp"
#include "esgval/commands.hpp"
#include "esgval/csv_io.hpp"
#include "esgval/esg_returns.hpp"
#include "esgval/informed_market.hpp"
#include "esgval/types.hpp"

namespace {

thread_local std::string g_last_error = "";

esgval_status code_of(const esgval::Error& e) {
  using esgval::ErrorCode;
  switch (e.code()) {
    case ErrorCode::InvalidArgument: return ESGVAL_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return ESGVAL_ERR_PARSE;
    case ErrorCode::Alignment: return ESGVAL_ERR_ALIGNMENT;
    case ErrorCode::Domain: return ESGVAL_ERR_DOMAIN;
    case ErrorCode::Degenerate: return ESGVAL_ERR_DEGENERATE;
    case ErrorCode::Singular: return ESGVAL_ERR_SINGULAR;
    case ErrorCode::Numeric: return ESGVAL_ERR_NUMERIC;
    case ErrorCode::Io: return ESGVAL_ERR_IO;
  }
  return ESGVAL_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes + last-error text.
template <typename Fn>
esgval_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ESGVAL_OK;
  } catch (const esgval::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ESGVAL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ESGVAL_ERR_INTERNAL;
  }
}

esgval_status fail_invalid(const char* msg) {
  g_last_error = msg;
  return ESGVAL_ERR_INVALID_ARGUMENT;
}

esgval::Convention convention_of(int32_t c) {
  if (c == ESGVAL_CONVENTION_ARITHMETIC) return esgval::Convention::Arithmetic;
  if (c == ESGVAL_CONVENTION_LOG) return esgval::Convention::Log;
  throw esgval::Error(esgval::ErrorCode::InvalidArgument,
                      "convention must be 0 (arithmetic) or 1 (log)");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct esgval_config {
  esgval::RunConfig cfg;
};

namespace {
// Shared shape of the run entry points that take (config, out_dir).
template <typename Fn>
esgval_status run_with_dir(const esgval_config* config, const char* out_dir,
                           char** report_out, Fn&& fn) {
  if (config == nullptr) return fail_invalid("config is NULL");
  if (out_dir == nullptr) return fail_invalid("out_dir is NULL");
  return guarded([&] {
    std::string report = fn(config->cfg, std::string(out_dir));
    if (report_out != nullptr) *report_out = dup_string(report);
  });
}
}  // namespace

extern "C" {

const char* esgval_version(void) { return "1.0.0"; }

const char* esgval_last_error(void) { return g_last_error.c_str(); }

esgval_status esgval_normalize_esg(double score, double esg_min,
                                   double esg_max, double c, double* e_out) {
  if (e_out == nullptr) return fail_invalid("e_out is NULL");
  return guarded([&] {
    esgval::EsgNormalization norm;
    norm.esg_min = esg_min;
    norm.esg_max = esg_max;
    norm.c = c;
    *e_out = esgval::normalize_esg(score, norm);
  });
}

esgval_status esgval_bsm_call(double s0, double strike, double rf,
                              double sigma, double t, double* price_out) {
  if (price_out == nullptr) return fail_invalid("price_out is NULL");
  return guarded([&] { *price_out = esgval::bsm_call(s0, strike, rf, sigma, t); });
}

esgval_status esgval_optimal_position_log(double n_e, double a, double* n_out) {
  if (n_out == nullptr) return fail_invalid("n_out is NULL");
  return guarded([&] { *n_out = esgval::optimal_n_log(n_e, a); });
}

esgval_status esgval_price_european(const esgval_lattice_spec* spec,
                                    const esgval_model_params* params,
                                    esgval_pricing_result* out) {
  if (spec == nullptr || params == nullptr || out == nullptr)
    return fail_invalid("spec, params, and out must be non-NULL");
  return guarded([&] {
    esgval::LatticeSpec ls;
    ls.s0 = spec->s0;
    ls.strike = spec->strike;
    ls.steps = spec->steps;
    ls.dt = spec->dt;
    ls.rf = spec->rf;
    if (spec->payoff == ESGVAL_PAYOFF_CALL) {
      ls.payoff = esgval::PayoffKind::EuropeanCall;
    } else if (spec->payoff == ESGVAL_PAYOFF_PUT) {
      ls.payoff = esgval::PayoffKind::EuropeanPut;
    } else {
      throw esgval::Error(esgval::ErrorCode::InvalidArgument,
                          "payoff must be 0 (call) or 1 (put)");
    }
    esgval::ModelParams mp;
    mp.mu = params->mu;
    mp.sigma = params->sigma;
    mp.p = params->p;
    mp.convention = convention_of(params->convention);
    esgval::PricingResult r = esgval::price_european(ls, mp);
    out->price = r.price;
    out->q_min = r.q_min;
    out->q_max = r.q_max;
    out->arb_violation = r.arb_violation ? 1 : 0;
  });
}

esgval_status esgval_estimate_params(const double* returns, size_t n_returns,
                                     double dt, int32_t convention,
                                     int32_t unbiased,
                                     esgval_model_params* out) {
  if (returns == nullptr || out == nullptr)
    return fail_invalid("returns and out must be non-NULL");
  return guarded([&] {
    esgval::EsgSeries series;
    series.r_lambda.assign(returns, returns + n_returns);
    series.convention = convention_of(convention);
    esgval::EstimateOptions opt;
    opt.dt = dt;
    opt.unbiased = unbiased != 0;
    esgval::ModelParams mp = esgval::estimate_params(series, opt);
    out->mu = mp.mu;
    out->sigma = mp.sigma;
    out->p = mp.p;
    out->convention = convention;
  });
}

esgval_status esgval_config_create(esgval_config** out) {
  if (out == nullptr) return fail_invalid("out is NULL");
  return guarded([&] { *out = new esgval_config{}; });
}

esgval_status esgval_config_load(const char* path, esgval_config** out) {
  if (path == nullptr || out == nullptr)
    return fail_invalid("path and out must be non-NULL");
  return guarded([&] {
    auto cfg = esgval::RunConfig::load(path);
    *out = new esgval_config{std::move(cfg)};
  });
}

esgval_status esgval_config_set(esgval_config* config, const char* key,
                                const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr)
    return fail_invalid("config, key, and value must be non-NULL");
  return guarded([&] { config->cfg.set(key, value); });
}

esgval_status esgval_config_get(const esgval_config* config, const char* key,
                                char* buf, size_t buf_len) {
  if (config == nullptr || key == nullptr || buf == nullptr)
    return fail_invalid("config, key, and buf must be non-NULL");
  return guarded([&] {
    if (!config->cfg.has(key))
      throw esgval::Error(esgval::ErrorCode::InvalidArgument,
                          std::string("config key '") + key + "' is not set");
    std::string v = config->cfg.get_string(key);
    if (buf_len < v.size() + 1)
      throw esgval::Error(esgval::ErrorCode::InvalidArgument,
                          "value buffer too small");
    std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

esgval_status esgval_config_hash(const esgval_config* config, char* buf,
                                 size_t buf_len) {
  if (config == nullptr || buf == nullptr)
    return fail_invalid("config and buf must be non-NULL");
  return guarded([&] {
    std::string hex = config->cfg.hash_hex();
    if (buf_len < hex.size() + 1)
      throw esgval::Error(esgval::ErrorCode::InvalidArgument,
                          "hash buffer too small (need 17 bytes)");
    std::memcpy(buf, hex.c_str(), hex.size() + 1);
  });
}

void esgval_config_free(esgval_config* config) { delete config; }

esgval_status esgval_run_esg_price(const esgval_config* config,
                                   const char* out_dir, char** report_out) {
  return run_with_dir(config, out_dir, report_out, esgval::run_esg_price);
}

esgval_status esgval_run_estimate(const esgval_config* config,
                                  const char* out_dir, char** report_out) {
  return run_with_dir(config, out_dir, report_out, esgval::run_estimate);
}

esgval_status esgval_run_price(const esgval_config* config,
                               char** report_out) {
  if (config == nullptr) return fail_invalid("config is NULL");
  return guarded([&] {
    std::string report = esgval::run_price(config->cfg);
    if (report_out != nullptr) *report_out = dup_string(report);
  });
}

esgval_status esgval_run_surface(const esgval_config* config,
                                 const char* out_dir, char** report_out) {
  return run_with_dir(config, out_dir, report_out, esgval::run_surface);
}

esgval_status esgval_run_fit_path(const esgval_config* config,
                                  const char* out_dir, char** report_out) {
  return run_with_dir(config, out_dir, report_out, esgval::run_fit_path);
}

esgval_status esgval_run_simulate_informed(const esgval_config* config,
                                           char** report_out) {
  if (config == nullptr) return fail_invalid("config is NULL");
  return guarded([&] {
    std::string report = esgval::run_simulate_informed(config->cfg);
    if (report_out != nullptr) *report_out = dup_string(report);
  });
}

void esgval_string_free(char* s) { std::free(s); }

}  // extern "C"
