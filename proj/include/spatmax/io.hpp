#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spatmax/design.hpp"
#include "spatmax/fit.hpp"
#include "spatmax/godambe.hpp"
#include "spatmax/panel.hpp"

namespace spatmax {

/// Shortest decimal string that round-trips the double exactly; "NA" for NaN.
std::string format_double(double v);

/// Provenance written as a leading comment line of every CSV artifact.
struct Provenance {
  std::string tool;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string comment_line() const;
};

void write_catalog_csv(const std::string& path, const SiteCatalog& sites, const Provenance& prov);
SiteCatalog read_catalog_csv(const std::string& path);

void write_daily_csv(const std::string& path, const DailyPanel& panel, const Provenance& prov);
DailyPanel read_daily_csv(const std::string& path, const SiteCatalog& sites);

void write_maxima_csv(const std::string& path, const BlockMaxima& maxima, const Provenance& prov);
BlockMaxima read_maxima_csv(const std::string& path, const SiteCatalog& sites);

void write_thresholds_csv(const std::string& path, const SiteCatalog& sites,
                          const ThresholdSpec& thresholds, const Provenance& prov);
ThresholdSpec read_thresholds_csv(const std::string& path, const SiteCatalog& sites);

/// Flat "section.key = value" configuration; '#' starts a comment.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<long long> get_int_list(const std::string& key,
                                      const std::vector<long long>& fallback) const;

  /// FNV-1a over the raw file bytes; stable provenance tag.
  const std::string& hash_hex() const { return hash_; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  std::string hash_;
  std::string origin_;
};

/// Covariate-index design from config keys design.mu, design.sigma, design.xi
/// (comma-separated 0-based columns of the catalog covariates; empty =
/// intercept only).
MarginalDesign design_from_config(const Config& cfg);

void write_fit_json(const std::string& path, const FitResult& fit, const Provenance& prov);
FitResult read_fit_json(const std::string& path);

void write_variance_json(const std::string& path, const GodambeResult& godambe,
                         const FitResult& fit, const Provenance& prov);
/// Reads back omega/n/se; A and B are restored as well.
GodambeResult read_variance_json(const std::string& path);

}  // namespace spatmax
