#include "esgval/csv_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace esgval {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw Error(ErrorCode::Parse, where + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw Error(ErrorCode::Parse, where + ": bad number '" + t + "'");
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof())
    throw Error(ErrorCode::Io, "cannot read " + path);
  return buf.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines = split(read_text_file(path), '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw Error(ErrorCode::Parse,
              path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Date parse_date(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  const std::string t = trim(iso);
  if (std::sscanf(t.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
    throw Error(ErrorCode::Parse, "bad date '" + t + "', expected YYYY-MM-DD");
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{unsigned(m)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok())
    throw Error(ErrorCode::Parse, "invalid calendar date '" + t + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int trading_days_between(Date d0, Date d1) {
  if (d1 <= d0) return 0;
  int count = 0;
  for (Date d = d0 + std::chrono::days{1}; d <= d1; d += std::chrono::days{1}) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) ++count;
  }
  return count;
}

std::vector<PriceRow> read_price_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "date,close")
    parse_fail(path, 1, "expected header 'date,close'");

  std::vector<PriceRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) parse_fail(path, i + 1, "expected 2 fields");
    PriceRow row;
    try {
      row.date = parse_date(fields[0]);
      row.close = parse_number(fields[1], "close");
    } catch (const Error& e) {
      parse_fail(path, i + 1, e.what());
    }
    if (!(row.close > 0.0)) parse_fail(path, i + 1, "close must be positive");
    if (!rows.empty() && !(rows.back().date < row.date))
      parse_fail(path, i + 1, "dates must be strictly increasing");
    rows.push_back(row);
  }
  if (rows.size() < 2)
    throw Error(ErrorCode::Degenerate, path + ": need at least two closes");
  return rows;
}

std::vector<RawEsgRecord> read_esg_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "effective_date,score")
    parse_fail(path, 1, "expected header 'effective_date,score'");

  std::vector<RawEsgRecord> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) parse_fail(path, i + 1, "expected 2 fields");
    RawEsgRecord row;
    try {
      row.effective_date = parse_date(fields[0]);
      row.score = parse_number(fields[1], "score");
    } catch (const Error& e) {
      parse_fail(path, i + 1, e.what());
    }
    if (!rows.empty() && !(rows.back().effective_date < row.effective_date))
      parse_fail(path, i + 1, "effective dates must be strictly increasing");
    rows.push_back(row);
  }
  if (rows.empty())
    throw Error(ErrorCode::Degenerate, path + ": no ESG records");
  return rows;
}

Chain read_chain_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "quote_date,expiry,strike,mid")
    parse_fail(path, 1, "expected header 'quote_date,expiry,strike,mid'");

  Chain chain;
  bool have_quote_date = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) parse_fail(path, i + 1, "expected 4 fields");
    ChainRow row;
    try {
      row.quote_date = parse_date(fields[0]);
      row.expiry = parse_date(fields[1]);
      row.strike = parse_number(fields[2], "strike");
      row.mid = parse_number(fields[3], "mid");
    } catch (const Error& e) {
      parse_fail(path, i + 1, e.what());
    }
    if (!(row.strike > 0.0)) parse_fail(path, i + 1, "strike must be positive");
    if (!(row.quote_date < row.expiry))
      parse_fail(path, i + 1, "expiry must follow the quote date");
    if (!have_quote_date) {
      chain.quote_date = row.quote_date;
      have_quote_date = true;
    } else if (row.quote_date != chain.quote_date) {
      parse_fail(path, i + 1, "all quotes must share one quote date");
    }
    if (row.mid > 0.0)
      chain.rows.push_back(row);
    else
      ++chain.dropped_nonpositive;
  }
  if (!have_quote_date)
    throw Error(ErrorCode::Degenerate, path + ": no quotes");
  return chain;
}

void write_surface_csv(const std::string& path, const Surface& surface,
                       const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "T_days,moneyness,value,residual,status\n";
  char buf[160];
  for (const SurfaceCell& cell : surface.cells) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%s\n", cell.t_days,
                  cell.moneyness, cell.value, cell.residual,
                  cell_status_name(cell.status));
    out << buf;
  }
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + tmp);
    out << content;
    out.flush();
    if (!out.good()) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::Io, "cannot write " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move " + tmp + " into place");
  }
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // input/output paths
      "price_csv", "esg_csv", "chain_csv", "driver_price_csv", "driver_esg_csv",
      "component_price_csvs", "component_esg_csvs", "out_dir",
      // model selection
      "lambda", "lambda_grid", "convention", "model", "surfaces",
      // ESG normalization
      "esg_min", "esg_max", "c",
      // market constants and step mapping
      "rf_annual", "steps_per_year",
      // explicit pricing inputs
      "s0", "strike", "expiry_days", "mu", "sigma", "p",
      // informed market
      "delta", "n_contracts", "paths", "seed",
      // path-dependent response
      "df", "df_h", "df_g", "shapes", "c1", "c2", "c3", "eta_floor",
      "fit_tol", "fit_max_evals",
      // calibration controls
      "sigma_lo", "sigma_hi", "tol", "theta_floor", "pd_path_cap",
      // estimation controls
      "unbiased_stdev",
  };
  return keys;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  return from_text(read_text_file(path));
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig config;
  const std::vector<std::string> lines = split(text, '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, "config line " + std::to_string(i + 1) +
                                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::Parse, "config line " + std::to_string(i + 1) +
                                        ": empty key or value");
    config.set(key, value);
  }
  return config;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (known_keys().count(key) == 0)
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw Error(ErrorCode::InvalidArgument, "missing config key '" + key + "'");
  return it->second;
}

std::string RunConfig::get_string_or(const std::string& key,
                                     const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const {
  return parse_number(get_string(key), "config key '" + key + "'");
}

double RunConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long RunConfig::get_long(const std::string& key) const {
  const double v = get_double(key);
  const long l = long(v);
  if (double(l) != v)
    throw Error(ErrorCode::InvalidArgument,
                "config key '" + key + "' must be an integer");
  return l;
}

long RunConfig::get_long_or(const std::string& key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

bool RunConfig::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::InvalidArgument,
              "config key '" + key + "' must be a boolean");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split(get_string(key), ','))
    out.push_back(parse_number(item, "config key '" + key + "'"));
  if (out.empty())
    throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' is empty");
  return out;
}

Convention RunConfig::get_convention_or(const std::string& key,
                                        Convention fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "arith" || v == "arithmetic") return Convention::Arithmetic;
  if (v == "log") return Convention::Log;
  throw Error(ErrorCode::InvalidArgument,
              "config key '" + key + "' must be arith or log");
}

std::string RunConfig::canonical_text() const {
  std::string text;
  for (const auto& [key, value] : values_) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  return text;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_text())));
  return buf;
}

}  // namespace esgval
