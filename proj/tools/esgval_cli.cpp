// Command-line front end. Links only the public C API.
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "esgval.h"

namespace {

// 0 success, 2 input error, 3 numerical failure.
int exit_code_of(esgval_status s) {
  switch (s) {
    case ESGVAL_OK:
      return 0;
    case ESGVAL_ERR_INVALID_ARGUMENT:
    case ESGVAL_ERR_PARSE:
    case ESGVAL_ERR_ALIGNMENT:
    case ESGVAL_ERR_IO:
      return 2;
    default:
      return 3;
  }
}

struct ConfigDeleter {
  void operator()(esgval_config* c) const { esgval_config_free(c); }
};
using ConfigPtr = std::unique_ptr<esgval_config, ConfigDeleter>;

struct CommonOpts {
  std::string config_path;
  std::string lambda;
  std::string convention;
  std::string model;
  std::string df;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run-configuration file (key=value)");
  cmd->add_option("--lambda", opts.lambda, "ESG intensity or comma-separated list in [0,1]");
  cmd->add_option("--convention", opts.convention, "compounding convention")
      ->check(CLI::IsMember({"arith", "log"}));
  cmd->add_option("--model", opts.model, "pricing model")
      ->check(CLI::IsMember({"plain", "informed", "pathdep"}));
  cmd->add_option("--df", opts.df, "degrees of freedom for the feedback shapes")
      ->check(CLI::IsMember({"5", "50"}));
  cmd->add_option("--out", opts.out_dir, "output directory");
}

// Builds the effective config: file (if given) plus flag overrides.
esgval_status build_config(const CommonOpts& opts, ConfigPtr& out) {
  esgval_config* raw = nullptr;
  esgval_status s = opts.config_path.empty()
                        ? esgval_config_create(&raw)
                        : esgval_config_load(opts.config_path.c_str(), &raw);
  if (s != ESGVAL_OK) return s;
  out.reset(raw);
  const std::pair<const char*, const std::string*> overrides[] = {
      {"lambda", &opts.lambda},
      {"convention", &opts.convention},
      {"model", &opts.model},
      {"df", &opts.df},
  };
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    s = esgval_config_set(out.get(), key, value->c_str());
    if (s != ESGVAL_OK) return s;
  }
  return ESGVAL_OK;
}

// --out wins; otherwise the config's out_dir; otherwise the working directory.
std::string resolve_out_dir(const CommonOpts& opts, const esgval_config* cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  char buf[4096];
  if (esgval_config_get(cfg, "out_dir", buf, sizeof buf) == ESGVAL_OK)
    return std::string(buf);
  return ".";
}

int report_failure(esgval_status s) {
  std::fprintf(stderr, "error: %s\n", esgval_last_error());
  return exit_code_of(s);
}

int emit_report(char* report) {
  if (report != nullptr) {
    std::fputs(report, stdout);
    esgval_string_free(report);
  }
  return 0;
}

using DirCommand = esgval_status (*)(const esgval_config*, const char*, char**);
using PlainCommand = esgval_status (*)(const esgval_config*, char**);

int run_dir_command(const CommonOpts& opts, DirCommand fn) {
  ConfigPtr cfg;
  esgval_status s = build_config(opts, cfg);
  if (s != ESGVAL_OK) return report_failure(s);
  const std::string out_dir = resolve_out_dir(opts, cfg.get());
  char* report = nullptr;
  s = fn(cfg.get(), out_dir.c_str(), &report);
  if (s != ESGVAL_OK) return report_failure(s);
  return emit_report(report);
}

int run_plain_command(const CommonOpts& opts, PlainCommand fn) {
  ConfigPtr cfg;
  esgval_status s = build_config(opts, cfg);
  if (s != ESGVAL_OK) return report_failure(s);
  char* report = nullptr;
  s = fn(cfg.get(), &report);
  if (s != ESGVAL_OK) return report_failure(s);
  return emit_report(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ESG-valued binomial pricing and calibration engine"};
  app.set_version_flag("--version", std::string(esgval_version()));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    DirCommand dir_fn;    // one of dir_fn/plain_fn is set
    PlainCommand plain_fn;
  };
  const Sub subs[] = {
      {"esg-price", "ESG-valued numeraire price series per lambda",
       esgval_run_esg_price, nullptr},
      {"estimate", "drift/volatility/up-probability estimates per lambda",
       esgval_run_estimate, nullptr},
      {"price", "single European option price with diagnostics", nullptr,
       esgval_run_price},
      {"surface", "calibrated parameter surfaces from an option chain",
       esgval_run_surface, nullptr},
      {"fit-path", "feedback-coefficient fit to a realized price path",
       esgval_run_fit_path, nullptr},
      {"simulate-informed", "Monte-Carlo check of the informed strategy moments",
       nullptr, esgval_run_simulate_informed},
  };

  CommonOpts opts[6];
  int rc = 0;
  for (int i = 0; i < 6; ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, opts[i]);
    const Sub& sub = subs[i];
    CommonOpts& o = opts[i];
    cmd->callback([&rc, &sub, &o] {
      rc = sub.dir_fn != nullptr ? run_dir_command(o, sub.dir_fn)
                                 : run_plain_command(o, sub.plain_fn);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return rc;
}
