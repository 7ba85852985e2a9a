#include "spatmax/benchmark.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "spatmax/decluster.hpp"
#include "spatmax/error.hpp"
#include "spatmax/fit.hpp"
#include "spatmax/godambe.hpp"
#include "spatmax/io.hpp"
#include "spatmax/rng.hpp"
#include "spatmax/simulate.hpp"

namespace spatmax {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kStreamBenchmark = 4;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Cell {
  int model;
  int sigma_id;
  int n_sites;
  int n_blocks;
};

struct RepOutcome {
  std::uint64_t seed = 0;
  bool m1_ok = false;
  bool m2_ok = false;
  bool m1_converged = false;
  bool m2_converged = false;
  std::vector<double> m1_est;
  std::vector<double> m2_est;
  std::vector<double> m2_se;
  std::string m1_error;
  std::string m2_error;
  double sim_ms = 0.0;
  double m1_ms = 0.0;
  double m2_ms = 0.0;
  double var_ms = 0.0;
};

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

RepOutcome run_replicate(const BenchmarkConfig& cfg, std::size_t cell_index, const Cell& cell,
                         int rep, const MarginalDesign& design, const SiteCatalog& sites,
                         const std::vector<double>& beta_true, const SmithDispersion& sigma_true) {
  RepOutcome out;
  out.seed = CounterRng::keyed(cfg.seed, {kStreamBenchmark, cell_index,
                                          static_cast<std::uint64_t>(rep)})
                 .next_u64();

  Scenario sc;
  sc.sites = sites;
  sc.design = design;
  sc.beta_true = beta_true;
  sc.sigma_true = sigma_true;
  sc.n_blocks = cell.n_blocks;
  sc.block_size = cfg.block_size;
  sc.seed = out.seed;

  auto t0 = Clock::now();
  SimulatedData sim = simulate_daily_panel(sc);
  out.sim_ms = elapsed_ms(t0);

  FitResult fit1;
  if (cfg.run_pairwise) {
    t0 = Clock::now();
    try {
      fit1 = fit_pairwise_onestep(sim.maxima, design, sites);
      out.m1_est = fit1.eta_hat();
      out.m1_ok = all_finite(out.m1_est) && fit1.theta_hat.valid();
      out.m1_converged = fit1.convergence.converged;
      if (!out.m1_ok) out.m1_error = "non-finite estimate";
    } catch (const Error& e) {
      out.m1_error = e.what();
    }
    out.m1_ms = elapsed_ms(t0);
  }

  if (cfg.run_two_step) {
    t0 = Clock::now();
    try {
      ThresholdSpec thresholds = thresholds_from_panel(sim.panel, cfg.threshold_quantile);
      std::span<const double> init_beta;
      const SmithDispersion* init_theta = nullptr;
      if (out.m1_ok) {
        init_beta = fit1.beta_hat;
        init_theta = &fit1.theta_hat;
      }
      FitResult fit2 =
          fit_two_step(sim.panel, sim.maxima, thresholds, design, sites, init_beta, init_theta);
      out.m2_est = fit2.eta_hat();
      out.m2_converged = fit2.convergence.converged;
      out.m2_ms = elapsed_ms(t0);

      t0 = Clock::now();
      Step1Workspace ws(sim.panel, thresholds);
      GodambeResult g = godambe_variance(fit2, &ws, sim.maxima, design, sites, AVariant::FD);
      out.var_ms = elapsed_ms(t0);
      out.m2_se = g.se;
      out.m2_ok = all_finite(out.m2_est) && fit2.theta_hat.valid() && all_finite(out.m2_se);
      if (!out.m2_ok) out.m2_error = "non-finite estimate or standard error";
    } catch (const Error& e) {
      out.m2_error = e.what();
      if (out.m2_ms == 0.0) out.m2_ms = elapsed_ms(t0);
    }
  }
  return out;
}

struct MethodSummary {
  int used = 0;
  int failed = 0;
  std::vector<double> mse, bias, ese, ase, coverage;
};

MethodSummary summarize(const std::vector<RepOutcome>& reps, bool two_step,
                        const std::vector<double>& truth) {
  const std::size_t P = truth.size();
  MethodSummary s;
  s.mse.assign(P, kNan);
  s.bias.assign(P, kNan);
  s.ese.assign(P, kNan);
  s.ase.assign(P, kNan);
  s.coverage.assign(P, kNan);

  std::vector<const RepOutcome*> used;
  for (const auto& r : reps) {
    if (two_step ? r.m2_ok : r.m1_ok) {
      used.push_back(&r);
    } else {
      ++s.failed;
    }
  }
  s.used = static_cast<int>(used.size());
  if (used.empty()) return s;

  for (std::size_t p = 0; p < P; ++p) {
    double sum = 0.0, sq_err = 0.0;
    for (const auto* r : used) {
      double e = two_step ? r->m2_est[p] : r->m1_est[p];
      sum += e;
      sq_err += (e - truth[p]) * (e - truth[p]);
    }
    double mean = sum / s.used;
    s.bias[p] = mean - truth[p];
    s.mse[p] = sq_err / s.used;
    if (s.used >= 2) {
      double ss = 0.0;
      for (const auto* r : used) {
        double e = two_step ? r->m2_est[p] : r->m1_est[p];
        ss += (e - mean) * (e - mean);
      }
      s.ese[p] = std::sqrt(ss / (s.used - 1));
    }
    if (two_step) {
      double se_sum = 0.0;
      int hit = 0;
      for (const auto* r : used) {
        double se = r->m2_se[p];
        se_sum += se;
        if (std::abs(r->m2_est[p] - truth[p]) <= 1.959963984540054 * se) ++hit;
      }
      s.ase[p] = se_sum / s.used;
      s.coverage[p] = 100.0 * hit / s.used;
    }
  }
  return s;
}

std::string log_line(const Cell& cell, int rep, const RepOutcome& r, bool run_two_step,
                     bool run_pairwise) {
  json j;
  j["model"] = cell.model;
  j["sigma"] = cell.sigma_id;
  j["S"] = cell.n_sites;
  j["n"] = cell.n_blocks;
  j["replicate"] = rep;
  j["seed"] = r.seed;
  j["sim_ms"] = r.sim_ms;
  if (run_pairwise) {
    json m;
    m["ok"] = r.m1_ok;
    m["converged"] = r.m1_converged;
    m["ms"] = r.m1_ms;
    if (!r.m1_error.empty()) m["error"] = r.m1_error;
    j["pairwise_onestep"] = m;
  }
  if (run_two_step) {
    json m;
    m["ok"] = r.m2_ok;
    m["converged"] = r.m2_converged;
    m["ms"] = r.m2_ms;
    m["variance_ms"] = r.var_ms;
    if (!r.m2_error.empty()) m["error"] = r.m2_error;
    j["two_step"] = m;
  }
  return j.dump();
}

}  // namespace

MarginalDesign study_design(int model) {
  MarginalDesign design;
  design.mu_covariates = {0, 1};
  if (model == 1) {
    // sigma and xi stay intercept-only
  } else if (model == 2) {
    design.sigma_covariates = {0, 1};
  } else {
    throw UsageError("unknown study model " + std::to_string(model) + " (expected 1 or 2)");
  }
  return design;
}

std::vector<double> study_beta_true(int model) {
  if (model == 1) return {5.0, -0.5, 1.0, 2.5, 0.2};
  if (model == 2) return {5.0, -0.5, 1.0, 2.5, 0.2, -0.2, 0.2};
  throw UsageError("unknown study model " + std::to_string(model) + " (expected 1 or 2)");
}

SmithDispersion study_sigma(int sigma_id) {
  if (sigma_id == 1) return SmithDispersion{4.0, 2.0, 4.0};
  if (sigma_id == 2) return SmithDispersion{16.0, 8.0, 16.0};
  throw UsageError("unknown dispersion setting " + std::to_string(sigma_id) +
                   " (expected 1 or 2)");
}

BenchmarkConfig benchmark_config_from(const Config& cfg) {
  BenchmarkConfig out;
  auto to_ints = [](const std::vector<long long>& v) {
    std::vector<int> r;
    for (long long x : v) r.push_back(static_cast<int>(x));
    return r;
  };
  out.models = to_ints(cfg.get_int_list("benchmark.models", {1}));
  out.sigma_ids = to_ints(cfg.get_int_list("benchmark.sigmas", {1}));
  out.site_counts = to_ints(cfg.get_int_list("benchmark.sites", {25}));
  out.block_counts = to_ints(cfg.get_int_list("benchmark.blocks", {20}));
  out.replicates = static_cast<int>(cfg.get_int("benchmark.replicates", 100));
  out.block_size = static_cast<int>(cfg.get_int("benchmark.block_size", 60));
  out.threshold_quantile = cfg.get_double("benchmark.threshold_quantile", 0.95);
  out.seed = cfg.get_u64("benchmark.seed", out.seed);
  std::string methods = cfg.get_string("benchmark.methods", "both");
  if (methods == "both") {
    out.run_two_step = out.run_pairwise = true;
  } else if (methods == "two-step") {
    out.run_two_step = true;
    out.run_pairwise = false;
  } else if (methods == "pairwise") {
    out.run_two_step = false;
    out.run_pairwise = true;
  } else {
    throw UsageError("benchmark.methods must be 'both', 'two-step', or 'pairwise'");
  }
  if (out.replicates < 1) throw UsageError("benchmark.replicates must be >= 1");
  if (out.block_size < 2) throw UsageError("benchmark.block_size must be >= 2");
  out.config_hash = cfg.hash_hex();
  return out;
}

unsigned resolve_thread_count() {
  if (const char* env = std::getenv("SPATMAX_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw UsageError("SPATMAX_THREADS must be a positive integer");
    }
    return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  std::vector<Cell> cells;
  for (int model : cfg.models) {
    for (int sigma_id : cfg.sigma_ids) {
      for (int S : cfg.site_counts) {
        for (int n : cfg.block_counts) {
          cells.push_back(Cell{model, sigma_id, S, n});
        }
      }
    }
  }
  if (cells.empty()) throw UsageError("benchmark config produced no cells");
  if (!cfg.run_two_step && !cfg.run_pairwise) {
    throw UsageError("benchmark config enables no estimation method");
  }

  const unsigned workers = resolve_thread_count();
  BenchmarkResult result;

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    MarginalDesign design = study_design(cell.model);
    std::vector<double> beta_true = study_beta_true(cell.model);
    SmithDispersion sigma_true = study_sigma(cell.sigma_id);
    SiteCatalog sites = grid_catalog(cell.n_sites);

    std::vector<double> truth = beta_true;
    truth.push_back(sigma_true.sigma11);
    truth.push_back(sigma_true.sigma12);
    truth.push_back(sigma_true.sigma22);
    std::vector<std::string> layout = design.beta_names();
    layout.insert(layout.end(), {"sigma11", "sigma12", "sigma22"});

    const int R = cfg.replicates;
    std::vector<RepOutcome> reps(static_cast<std::size_t>(R));
    std::atomic<int> next{0};
    auto work = [&] {
      while (true) {
        int rep = next.fetch_add(1);
        if (rep >= R) break;
        reps[static_cast<std::size_t>(rep)] =
            run_replicate(cfg, c, cell, rep, design, sites, beta_true, sigma_true);
      }
    };
    unsigned pool_size = std::min<unsigned>(workers, static_cast<unsigned>(R));
    if (pool_size <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(pool_size);
      for (unsigned w = 0; w < pool_size; ++w) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }

    for (int rep = 0; rep < R; ++rep) {
      result.log_lines.push_back(log_line(cell, rep, reps[static_cast<std::size_t>(rep)],
                                          cfg.run_two_step, cfg.run_pairwise));
    }

    MethodSummary m2, m1;
    if (cfg.run_two_step) m2 = summarize(reps, true, truth);
    if (cfg.run_pairwise) m1 = summarize(reps, false, truth);

    auto push_rows = [&](const MethodSummary& s, FitMethod method) {
      const MethodSummary& other = (method == FitMethod::TwoStep) ? m1 : m2;
      bool have_other = (method == FitMethod::TwoStep) ? cfg.run_pairwise : cfg.run_two_step;
      for (std::size_t p = 0; p < truth.size(); ++p) {
        MetricsRow row;
        row.model = cell.model;
        row.sigma_id = cell.sigma_id;
        row.n_sites = cell.n_sites;
        row.n_blocks = cell.n_blocks;
        row.block_size = cfg.block_size;
        row.replicates = R;
        row.used = s.used;
        row.failed = s.failed;
        row.flagged = (static_cast<double>(s.failed) / R > 0.05) ? 1 : 0;
        row.parameter = layout[p];
        row.method = method_name(method);
        row.truth = truth[p];
        row.mse = s.mse[p];
        row.bias = s.bias[p];
        row.ese = s.ese[p];
        row.ase = s.ase[p];
        row.coverage = s.coverage[p];
        if (have_other) {
          double mse_two = (method == FitMethod::TwoStep) ? s.mse[p] : other.mse[p];
          double mse_pair = (method == FitMethod::TwoStep) ? other.mse[p] : s.mse[p];
          row.re = mse_two / mse_pair;
        } else {
          row.re = kNan;
        }
        result.rows.push_back(std::move(row));
      }
    };
    if (cfg.run_two_step) push_rows(m2, FitMethod::TwoStep);
    if (cfg.run_pairwise) push_rows(m1, FitMethod::PairwiseOnestep);
  }
  return result;
}

void write_metrics_csv(const std::string& path, const BenchmarkResult& result,
                       const std::string& provenance_line) {
  std::string body = provenance_line + "\n";
  body +=
      "model,sigma,S,n,m,replicates,used,failed,flagged,parameter,method,truth,mse,bias,ese,ase,"
      "coverage,re\n";
  for (const auto& r : result.rows) {
    body += std::to_string(r.model) + "," + std::to_string(r.sigma_id) + "," +
            std::to_string(r.n_sites) + "," + std::to_string(r.n_blocks) + "," +
            std::to_string(r.block_size) + "," + std::to_string(r.replicates) + "," +
            std::to_string(r.used) + "," + std::to_string(r.failed) + "," +
            std::to_string(r.flagged) + "," + r.parameter + "," + r.method + "," +
            format_double(r.truth) + "," + format_double(r.mse) + "," + format_double(r.bias) +
            "," + format_double(r.ese) + "," + format_double(r.ase) + "," +
            format_double(r.coverage) + "," + format_double(r.re) + "\n";
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << body;
  if (!out) throw DataError("failed while writing " + path);
}

}  // namespace spatmax
