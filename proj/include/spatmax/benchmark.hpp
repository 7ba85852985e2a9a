#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatmax/design.hpp"
#include "spatmax/smith.hpp"

namespace spatmax {

class Config;

/// Marginal designs of the two study models over the catalog covariates
/// (column 0 = x1, column 1 = x2).
MarginalDesign study_design(int model);
std::vector<double> study_beta_true(int model);
/// Dispersion settings: 1 -> [[4,2],[2,4]], 2 -> [[16,8],[8,16]].
SmithDispersion study_sigma(int sigma_id);

struct BenchmarkConfig {
  std::vector<int> models{1};
  std::vector<int> sigma_ids{1};
  std::vector<int> site_counts{25};
  std::vector<int> block_counts{20};
  int replicates = 100;
  int block_size = 60;
  double threshold_quantile = 0.95;
  std::uint64_t seed = 20230815;
  bool run_two_step = true;
  bool run_pairwise = true;
  std::string config_hash;
};

BenchmarkConfig benchmark_config_from(const Config& cfg);

struct MetricsRow {
  int model = 0;
  int sigma_id = 0;
  int n_sites = 0;
  int n_blocks = 0;
  int block_size = 0;
  int replicates = 0;
  int used = 0;
  int failed = 0;
  int flagged = 0;
  std::string parameter;
  std::string method;
  double truth = 0.0;
  double mse = 0.0;
  double bias = 0.0;
  double ese = 0.0;
  double ase = 0.0;      // NaN when the method carries no sandwich errors
  double coverage = 0.0;  // NaN likewise
  double re = 0.0;       // MSE(two-step) / MSE(pairwise one-step)
};

struct BenchmarkResult {
  std::vector<MetricsRow> rows;
  std::vector<std::string> log_lines;  // JSON lines, one per (cell, replicate)
};

/// Runs every cell in the config cross product. Deterministic for a fixed
/// config regardless of the worker count (SPATMAX_THREADS).
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

void write_metrics_csv(const std::string& path, const BenchmarkResult& result,
                       const std::string& provenance_line);

/// Worker cap: SPATMAX_THREADS if set, otherwise the hardware concurrency.
unsigned resolve_thread_count();

}  // namespace spatmax
