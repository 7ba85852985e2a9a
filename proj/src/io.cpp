#include "spatmax/io.hpp"

#include <algorithm>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "spatmax/error.hpp"
#include "spatmax/likelihood.hpp"
#include "spatmax/version.hpp"

namespace spatmax {

namespace {

using json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_double_field(const std::string& field, const std::string& path, std::size_t line_no,
                          bool allow_na) {
  if (field == "NA") {
    if (allow_na) return kMissing;
    throw DataError(path + ":" + std::to_string(line_no) + ": NA is not allowed in this column");
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse number '" + field + "'");
  }
  return v;
}

long long parse_int_field(const std::string& field, const std::string& path, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": cannot parse integer '" + field +
                    "'");
  }
  return v;
}

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  CsvFile csv;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      csv.header = std::move(fields);
      have_header = true;
    } else {
      csv.rows.emplace_back(line_no, std::move(fields));
    }
  }
  if (!have_header) throw DataError(path + ": missing header row");
  return csv;
}

void require_header(const CsvFile& csv, const std::vector<std::string>& expected,
                    const std::string& path) {
  if (csv.header != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) want += ",";
      want += expected[i];
    }
    std::string got;
    for (std::size_t i = 0; i < csv.header.size(); ++i) {
      if (i) got += ",";
      got += csv.header[i];
    }
    throw DataError(path + ": expected header '" + want + "' but found '" + got + "'");
  }
}

void require_field_count(const std::vector<std::string>& fields, std::size_t n,
                         const std::string& path, std::size_t line_no) {
  if (fields.size() != n) {
    throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(n) +
                    " fields, found " + std::to_string(fields.size()));
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

std::map<std::string, int> site_index_map(const SiteCatalog& sites) {
  std::map<std::string, int> idx;
  for (int s = 0; s < sites.size(); ++s) idx[sites.sites[s].id] = s;
  return idx;
}

std::vector<std::string> site_ids_of(const SiteCatalog& sites) {
  std::vector<std::string> ids;
  ids.reserve(sites.sites.size());
  for (const auto& site : sites.sites) ids.push_back(site.id);
  return ids;
}

json vector_to_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) {
    if (std::isfinite(x)) {
      arr.push_back(x);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_array() || j.empty()) throw DataError(path + ": field '" + key + "' must be a matrix");
  const std::size_t nr = j.size();
  const std::size_t nc = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
  for (std::size_t i = 0; i < nr; ++i) {
    if (!j[i].is_array() || j[i].size() != nc) {
      throw DataError(path + ": field '" + key + "' has ragged rows");
    }
    for (std::size_t k = 0; k < nc; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

double json_number_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j[key].get<double>();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON (" + e.what() + ")");
  }
  return j;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kFnvPrime;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericError("failed to format floating point value");
  return std::string(buf, ptr);
}

std::string Provenance::comment_line() const {
  std::string out = "# " + (tool.empty() ? std::string(kToolName) : tool);
  out += " " + std::string(kToolVersion);
  out += " config=" + (config_hash.empty() ? std::string("none") : config_hash);
  out += " seed=" + std::to_string(seed);
  return out;
}

void write_catalog_csv(const std::string& path, const SiteCatalog& sites, const Provenance& prov) {
  sites.validate();
  auto out = open_out(path);
  out << prov.comment_line() << "\n";
  out << "site_id,x1,x2";
  const int k = sites.covariate_dim();
  for (int j = 0; j < k; ++j) out << ",cov" << (j + 1);
  out << "\n";
  for (const auto& site : sites.sites) {
    out << site.id << "," << format_double(site.x1) << "," << format_double(site.x2);
    for (int j = 0; j < k; ++j) out << "," << format_double(site.covariates[j]);
    out << "\n";
  }
  if (!out) throw DataError("failed while writing " + path);
}

SiteCatalog read_catalog_csv(const std::string& path) {
  CsvFile csv = read_csv(path);
  if (csv.header.size() < 3 || csv.header[0] != "site_id" || csv.header[1] != "x1" ||
      csv.header[2] != "x2") {
    throw DataError(path + ": catalog header must start with 'site_id,x1,x2'");
  }
  SiteCatalog sites;
  const std::size_t k = csv.header.size() - 3;
  std::set<std::string> seen;
  for (const auto& [line_no, fields] : csv.rows) {
    require_field_count(fields, 3 + k, path, line_no);
    if (!seen.insert(fields[0]).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate site_id '" + fields[0] +
                      "'");
    }
    Site site;
    site.id = fields[0];
    site.x1 = parse_double_field(fields[1], path, line_no, false);
    site.x2 = parse_double_field(fields[2], path, line_no, false);
    for (std::size_t j = 0; j < k; ++j) {
      site.covariates.push_back(parse_double_field(fields[3 + j], path, line_no, false));
    }
    sites.sites.push_back(std::move(site));
  }
  try {
    sites.validate();
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
  return sites;
}

void write_daily_csv(const std::string& path, const DailyPanel& panel, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.comment_line() << "\n";
  out << "site_id,block,day,value\n";
  for (int s = 0; s < panel.n_sites(); ++s) {
    for (int t = 0; t < panel.n_blocks; ++t) {
      for (int k = 0; k < panel.block_size; ++k) {
        out << panel.site_ids[s] << "," << panel.block_labels[t] << "," << (k + 1) << ","
            << format_double(panel.at(s, t, k)) << "\n";
      }
    }
  }
  if (!out) throw DataError("failed while writing " + path);
}

DailyPanel read_daily_csv(const std::string& path, const SiteCatalog& sites) {
  CsvFile csv = read_csv(path);
  require_header(csv, {"site_id", "block", "day", "value"}, path);
  auto idx = site_index_map(sites);

  std::set<int> block_set;
  long long max_day = 0;
  for (const auto& [line_no, fields] : csv.rows) {
    require_field_count(fields, 4, path, line_no);
    long long block = parse_int_field(fields[1], path, line_no);
    if (block < INT_MIN || block > INT_MAX) {
      throw DataError(path + ":" + std::to_string(line_no) + ": block label out of range");
    }
    block_set.insert(static_cast<int>(block));
    long long day = parse_int_field(fields[2], path, line_no);
    if (day < 1 || day > 100000) {
      throw DataError(path + ":" + std::to_string(line_no) + ": day must be in 1..100000");
    }
    max_day = std::max(max_day, day);
  }
  if (csv.rows.empty()) throw DataError(path + ": no data rows");

  std::vector<int> blocks(block_set.begin(), block_set.end());
  std::map<int, int> block_index;
  for (std::size_t t = 0; t < blocks.size(); ++t) block_index[blocks[t]] = static_cast<int>(t);

  DailyPanel panel = DailyPanel::empty(site_ids_of(sites), blocks, static_cast<int>(max_day));
  std::vector<bool> filled(panel.values.size(), false);
  for (const auto& [line_no, fields] : csv.rows) {
    auto it = idx.find(fields[0]);
    if (it == idx.end()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown site_id '" + fields[0] +
                      "'");
    }
    int s = it->second;
    int t = block_index.at(static_cast<int>(parse_int_field(fields[1], path, line_no)));
    int k = static_cast<int>(parse_int_field(fields[2], path, line_no)) - 1;
    std::size_t flat = panel.index(s, t, k);
    if (filled[flat]) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate record for site '" +
                      fields[0] + "', block " + fields[1] + ", day " + fields[2]);
    }
    filled[flat] = true;
    panel.values[flat] = parse_double_field(fields[3], path, line_no, true);
  }
  return panel;
}

void write_maxima_csv(const std::string& path, const BlockMaxima& maxima, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.comment_line() << "\n";
  out << "site_id,block,max\n";
  for (int s = 0; s < maxima.n_sites(); ++s) {
    for (int t = 0; t < maxima.n_blocks; ++t) {
      out << maxima.site_ids[s] << "," << maxima.block_labels[t] << ","
          << format_double(maxima.at(s, t)) << "\n";
    }
  }
  if (!out) throw DataError("failed while writing " + path);
}

BlockMaxima read_maxima_csv(const std::string& path, const SiteCatalog& sites) {
  CsvFile csv = read_csv(path);
  require_header(csv, {"site_id", "block", "max"}, path);
  auto idx = site_index_map(sites);

  std::set<int> block_set;
  for (const auto& [line_no, fields] : csv.rows) {
    require_field_count(fields, 3, path, line_no);
    long long block = parse_int_field(fields[1], path, line_no);
    if (block < INT_MIN || block > INT_MAX) {
      throw DataError(path + ":" + std::to_string(line_no) + ": block label out of range");
    }
    block_set.insert(static_cast<int>(block));
  }
  if (csv.rows.empty()) throw DataError(path + ": no data rows");

  std::vector<int> blocks(block_set.begin(), block_set.end());
  std::map<int, int> block_index;
  for (std::size_t t = 0; t < blocks.size(); ++t) block_index[blocks[t]] = static_cast<int>(t);

  BlockMaxima maxima = BlockMaxima::empty(site_ids_of(sites), blocks, MaximaProvenance::FromPanel);
  std::vector<bool> filled(maxima.values.size(), false);
  for (const auto& [line_no, fields] : csv.rows) {
    auto it = idx.find(fields[0]);
    if (it == idx.end()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown site_id '" + fields[0] +
                      "'");
    }
    std::size_t flat = maxima.index(
        it->second, block_index.at(static_cast<int>(parse_int_field(fields[1], path, line_no))));
    if (filled[flat]) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate record for site '" +
                      fields[0] + "', block " + fields[1]);
    }
    filled[flat] = true;
    maxima.values[flat] = parse_double_field(fields[2], path, line_no, true);
  }
  return maxima;
}

void write_thresholds_csv(const std::string& path, const SiteCatalog& sites,
                          const ThresholdSpec& thresholds, const Provenance& prov) {
  if (thresholds.u.size() != sites.sites.size()) {
    throw DataError("threshold vector does not match the site catalog");
  }
  auto out = open_out(path);
  out << prov.comment_line() << "\n";
  out << "site_id,u,quantile_level\n";
  for (int s = 0; s < sites.size(); ++s) {
    out << sites.sites[s].id << "," << format_double(thresholds.u[s]) << ","
        << format_double(thresholds.quantile_level) << "\n";
  }
  if (!out) throw DataError("failed while writing " + path);
}

ThresholdSpec read_thresholds_csv(const std::string& path, const SiteCatalog& sites) {
  CsvFile csv = read_csv(path);
  require_header(csv, {"site_id", "u", "quantile_level"}, path);
  auto idx = site_index_map(sites);
  ThresholdSpec spec;
  spec.u.assign(sites.sites.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [line_no, fields] : csv.rows) {
    require_field_count(fields, 3, path, line_no);
    auto it = idx.find(fields[0]);
    if (it == idx.end()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown site_id '" + fields[0] +
                      "'");
    }
    if (!std::isnan(spec.u[static_cast<std::size_t>(it->second)])) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate site_id '" + fields[0] +
                      "'");
    }
    spec.u[static_cast<std::size_t>(it->second)] = parse_double_field(fields[1], path, line_no, false);
    spec.quantile_level = parse_double_field(fields[2], path, line_no, false);
  }
  for (std::size_t s = 0; s < spec.u.size(); ++s) {
    if (std::isnan(spec.u[s])) {
      throw DataError(path + ": missing threshold for site '" + sites.sites[s].id + "'");
    }
  }
  return spec;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path);
}

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  cfg.hash_ = fnv1a_hex(text);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": expected 'section.key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || key.find_first_not_of(
                           "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.") !=
                           std::string::npos) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": invalid key '" + key + "'");
    }
    if (!cfg.kv_.emplace(key, value).second) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw UsageError(origin_ + ": missing required config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  std::string v = get_string(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError(origin_ + ": config key '" + key + "' is not a number: '" + v + "'");
  }
  return out;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
  std::string v = get_string(key);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError(origin_ + ": config key '" + key + "' is not an integer: '" + v + "'");
  }
  return out;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError(origin_ + ": config key '" + key + "' is not an unsigned integer: '" + v +
                     "'");
  }
  return out;
}

std::vector<long long> Config::get_int_list(const std::string& key,
                                            const std::vector<long long>& fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  std::vector<long long> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    auto pos = v.find(',', start);
    std::string field =
        trim(std::string_view(v).substr(start, pos == std::string::npos ? v.size() - start
                                                                        : pos - start));
    if (!field.empty()) {
      long long x = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw UsageError(origin_ + ": config key '" + key + "' has a non-integer entry: '" +
                         field + "'");
      }
      out.push_back(x);
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) {
    throw UsageError(origin_ + ": config key '" + key + "' must list at least one integer");
  }
  return out;
}

MarginalDesign design_from_config(const Config& cfg) {
  auto parse_cols = [&](const std::string& key) {
    std::vector<int> cols;
    if (!cfg.has(key)) return cols;  // absent key = intercept only
    for (long long c : cfg.get_int_list(key, {})) {
      if (c < 0) throw UsageError("config key '" + key + "' must list 0-based covariate columns");
      cols.push_back(static_cast<int>(c));
    }
    return cols;
  };
  MarginalDesign design;
  design.mu_covariates = parse_cols("design.mu");
  design.sigma_covariates = parse_cols("design.sigma");
  design.xi_covariates = parse_cols("design.xi");
  Link link = parse_link(cfg.get_string("design.link", "identity"));
  design.link_mu = design.link_sigma = design.link_xi = link;
  return design;
}

void write_fit_json(const std::string& path, const FitResult& fit, const Provenance& prov) {
  json j;
  j["tool"] = prov.tool.empty() ? std::string(kToolName) : prov.tool;
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = prov.config_hash.empty() ? std::string("none") : prov.config_hash;
  j["seed"] = prov.seed;
  j["method"] = method_name(fit.method);
  j["parameter_layout"] = fit.parameter_layout;
  j["beta_hat"] = vector_to_json(fit.beta_hat);
  j["theta_hat"] = {fit.theta_hat.sigma11, fit.theta_hat.sigma12, fit.theta_hat.sigma22};
  j["nll_step1"] = std::isfinite(fit.nll_step1) ? json(fit.nll_step1) : json(nullptr);
  j["nll_step2"] = std::isfinite(fit.nll_step2) ? json(fit.nll_step2) : json(nullptr);
  j["convergence"] = {{"converged", fit.convergence.converged},
                      {"iterations", fit.convergence.iterations},
                      {"evaluations", fit.convergence.evaluations},
                      {"grad_norm", fit.convergence.grad_norm},
                      {"note", fit.convergence.note}};
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("failed while writing " + path);
}

FitResult read_fit_json(const std::string& path) {
  json j = load_json_file(path);
  FitResult fit;
  try {
    fit.method = parse_method(j.at("method").get<std::string>());
    fit.beta_hat = j.at("beta_hat").get<std::vector<double>>();
    auto theta = j.at("theta_hat").get<std::vector<double>>();
    if (theta.size() != 3) throw DataError(path + ": theta_hat must have 3 entries");
    fit.theta_hat = SmithDispersion{theta[0], theta[1], theta[2]};
    fit.parameter_layout = j.at("parameter_layout").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed fit record (" + e.what() + ")");
  }
  fit.nll_step1 = json_number_or_nan(j, "nll_step1");
  fit.nll_step2 = json_number_or_nan(j, "nll_step2");
  if (j.contains("convergence")) {
    const json& c = j["convergence"];
    fit.convergence.converged = c.value("converged", true);
    fit.convergence.iterations = c.value("iterations", 0);
    fit.convergence.evaluations = c.value("evaluations", 0);
    fit.convergence.grad_norm = json_number_or_nan(c, "grad_norm");
    fit.convergence.note = c.value("note", std::string());
  }
  if (fit.parameter_layout.size() != fit.beta_hat.size() + 3) {
    throw DataError(path + ": parameter_layout does not match beta_hat plus dispersion");
  }
  return fit;
}

void write_variance_json(const std::string& path, const GodambeResult& godambe,
                         const FitResult& fit, const Provenance& prov) {
  json j;
  j["tool"] = prov.tool.empty() ? std::string(kToolName) : prov.tool;
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = prov.config_hash.empty() ? std::string("none") : prov.config_hash;
  j["seed"] = prov.seed;
  j["method"] = method_name(fit.method);
  j["a_variant"] = a_variant_name(godambe.variant);
  j["n_blocks"] = godambe.n_blocks;
  j["cond_A"] = godambe.cond_A;
  j["parameter_layout"] = fit.parameter_layout;
  j["se"] = vector_to_json(godambe.se);
  json by_name;
  for (std::size_t i = 0; i < fit.parameter_layout.size() && i < godambe.se.size(); ++i) {
    by_name[fit.parameter_layout[i]] = godambe.se[i];
  }
  j["se_by_parameter"] = by_name;
  j["omega"] = matrix_to_json(godambe.omega);
  j["A"] = matrix_to_json(godambe.A);
  j["B"] = matrix_to_json(godambe.B);
  auto out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("failed while writing " + path);
}

GodambeResult read_variance_json(const std::string& path) {
  json j = load_json_file(path);
  GodambeResult g;
  try {
    g.variant = parse_a_variant(j.at("a_variant").get<std::string>());
    g.n_blocks = j.at("n_blocks").get<std::size_t>();
    g.cond_A = json_number_or_nan(j, "cond_A");
    g.se = j.at("se").get<std::vector<double>>();
    g.omega = matrix_from_json(j.at("omega"), path, "omega");
    g.A = matrix_from_json(j.at("A"), path, "A");
    g.B = matrix_from_json(j.at("B"), path, "B");
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed variance record (" + e.what() + ")");
  }
  return g;
}

}  // namespace spatmax
