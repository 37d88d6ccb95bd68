#pragma once

#include <string>

#include "esgval/csv_io.hpp"

namespace esgval {

// Command entry points shared by the C API and the CLI. Each validates its
// inputs from the run configuration, computes, and returns a short report.
// Commands that produce files stage every output first and only then move the
// staged files into place, so a failing run leaves no partial outputs.

std::string run_esg_price(const RunConfig& config, const std::string& out_dir);
std::string run_estimate(const RunConfig& config, const std::string& out_dir);
std::string run_price(const RunConfig& config);
std::string run_surface(const RunConfig& config, const std::string& out_dir);
std::string run_fit_path(const RunConfig& config, const std::string& out_dir);
std::string run_simulate_informed(const RunConfig& config);

}  // namespace esgval
