#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "esgval/calibration.hpp"
#include "esgval/esg_returns.hpp"
#include "esgval/types.hpp"

namespace esgval {

Date parse_date(const std::string& iso);     // YYYY-MM-DD
std::string format_date(Date date);

// Weekdays strictly after d0 up to and including d1.
int trading_days_between(Date d0, Date d1);

struct PriceRow {
  Date date;
  double close = 0.0;
};

struct ChainRow {
  Date quote_date;
  Date expiry;
  double strike = 0.0;
  double mid = 0.0;
};

struct Chain {
  Date quote_date;
  std::vector<ChainRow> rows;     // mid > 0 only
  int dropped_nonpositive = 0;    // rows excluded for mid <= 0
};

// price csv: header "date,close"; dates strictly increasing, closes positive.
std::vector<PriceRow> read_price_csv(const std::string& path);

// esg csv: header "effective_date,score"; effective dates strictly increasing.
std::vector<RawEsgRecord> read_esg_csv(const std::string& path);

// chain csv: header "quote_date,expiry,strike,mid"; one quote date per file,
// expiry after the quote date, strike positive. Quotes with mid <= 0 are
// excluded and counted.
Chain read_chain_csv(const std::string& path);

// surface csv: "# config_hash=<hex>" line, then
// "T_days,moneyness,value,residual,status" rows sorted by maturity then
// moneyness. Written atomically.
void write_surface_csv(const std::string& path, const Surface& surface,
                       const std::string& config_hash);

// Writes content to a temporary sibling and renames it into place, so readers
// never observe partial files.
void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& text);

// Flat key/value run configuration: one "key = value" per line, '#' comments,
// unknown keys rejected. The hash covers the canonical sorted key=value text,
// so it identifies the effective configuration.
class RunConfig {
 public:
  static RunConfig load(const std::string& path);
  static RunConfig from_text(const std::string& text);
  RunConfig() = default;

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long_or(const std::string& key, long fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  Convention get_convention_or(const std::string& key, Convention fallback) const;

  std::string canonical_text() const;
  std::string hash_hex() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace esgval
