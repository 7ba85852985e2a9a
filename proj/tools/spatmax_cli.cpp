#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "spatmax/benchmark.hpp"
#include "spatmax/decluster.hpp"
#include "spatmax/error.hpp"
#include "spatmax/fit.hpp"
#include "spatmax/godambe.hpp"
#include "spatmax/io.hpp"
#include "spatmax/risk.hpp"
#include "spatmax/simulate.hpp"
#include "spatmax/version.hpp"

namespace {

using namespace spatmax;
using json = nlohmann::ordered_json;

void print_error_record(const char* type, const std::string& message) {
  json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

int site_index_of(const SiteCatalog& sites, const std::string& id) {
  for (int s = 0; s < sites.size(); ++s) {
    if (sites.sites[s].id == id) return s;
  }
  throw UsageError("unknown site id '" + id + "'");
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text, const SiteCatalog& sites) {
  std::vector<std::pair<int, int>> pairs;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(',', start);
    std::string item = text.substr(start, pos == std::string::npos ? std::string::npos
                                                                   : pos - start);
    if (!item.empty()) {
      auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw UsageError("pair '" + item + "' must look like SITE_A:SITE_B");
      }
      int i = site_index_of(sites, item.substr(0, colon));
      int j = site_index_of(sites, item.substr(colon + 1));
      if (i == j) throw UsageError("pair '" + item + "' names the same site twice");
      pairs.emplace_back(i, j);
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (pairs.empty()) throw UsageError("--pairs must list at least one SITE_A:SITE_B pair");
  return pairs;
}

struct CommonPaths {
  std::string config;
  std::string catalog;
  std::string panel;
  std::string maxima;
  std::string thresholds;
  std::string fit;
  std::string variance;
  std::string init;
  std::string out;
  std::string out_panel;
  std::string out_maxima;
  std::string out_catalog;
  std::string out_thresholds;
  std::string log;
  std::string method = "two-step";
  std::string a_variant = "fd";
  std::string pairs;
  double quantile = 0.95;
  double period = 50.0;
  int draws = 0;
  std::uint64_t seed = 1;
};

BlockMaxima load_maxima(const CommonPaths& p, const SiteCatalog& sites, const DailyPanel* panel,
                        double max_missing_frac) {
  if (!p.maxima.empty()) return read_maxima_csv(p.maxima, sites);
  if (panel != nullptr) return block_maxima(*panel, max_missing_frac);
  throw UsageError("either --maxima or --panel is required");
}

ThresholdSpec load_thresholds(const CommonPaths& p, const SiteCatalog& sites,
                              const DailyPanel& panel, double quantile) {
  if (!p.thresholds.empty()) return read_thresholds_csv(p.thresholds, sites);
  return thresholds_from_panel(panel, quantile);
}

int run_simulate(const CommonPaths& p) {
  Config cfg = Config::from_file(p.config);
  int model = static_cast<int>(cfg.get_int("scenario.model", 1));
  int sigma_id = static_cast<int>(cfg.get_int("scenario.sigma", 1));
  Scenario sc;
  sc.sites = grid_catalog(static_cast<int>(cfg.get_int("scenario.sites", 25)));
  sc.design = study_design(model);
  sc.beta_true = study_beta_true(model);
  sc.sigma_true = study_sigma(sigma_id);
  sc.n_blocks = static_cast<int>(cfg.get_int("scenario.blocks", 20));
  sc.block_size = static_cast<int>(cfg.get_int("scenario.block_size", 60));
  sc.seed = cfg.get_u64("scenario.seed", 20230815);
  if (sc.n_blocks < 1 || sc.block_size < 2) {
    throw UsageError("scenario.blocks must be >= 1 and scenario.block_size >= 2");
  }

  SimulatedData sim = simulate_daily_panel(sc);
  Provenance prov{kToolName, cfg.hash_hex(), sc.seed};
  if (!p.out_catalog.empty()) write_catalog_csv(p.out_catalog, sc.sites, prov);
  if (!p.out_panel.empty()) write_daily_csv(p.out_panel, sim.panel, prov);
  if (!p.out_maxima.empty()) write_maxima_csv(p.out_maxima, sim.maxima, prov);
  if (p.out_catalog.empty() && p.out_panel.empty() && p.out_maxima.empty()) {
    throw UsageError("simulate needs at least one of --out-catalog, --out-panel, --out-maxima");
  }
  std::cout << "simulated model " << model << " over " << sc.sites.size() << " sites, "
            << sc.n_blocks << " blocks of " << sc.block_size << " days (seed " << sc.seed << ")\n";
  return 0;
}

int run_decluster(const CommonPaths& p) {
  SiteCatalog sites = read_catalog_csv(p.catalog);
  DailyPanel panel = read_daily_csv(p.panel, sites);
  ThresholdSpec thresholds = thresholds_from_panel(panel, p.quantile);
  DailyPanel declustered = decluster_panel(panel, thresholds);
  Provenance prov{kToolName, "none", 0};
  if (p.out_panel.empty() && p.out_thresholds.empty()) {
    throw UsageError("decluster needs --out-panel and/or --out-thresholds");
  }
  if (!p.out_panel.empty()) write_daily_csv(p.out_panel, declustered, prov);
  if (!p.out_thresholds.empty()) write_thresholds_csv(p.out_thresholds, sites, thresholds, prov);
  std::cout << "declustered " << sites.size() << " sites at the " << p.quantile
            << " quantile\n";
  return 0;
}

int run_fit(const CommonPaths& p) {
  Config cfg = Config::from_file(p.config);
  SiteCatalog sites = read_catalog_csv(p.catalog);
  MarginalDesign design = design_from_config(cfg);
  FitMethod method = parse_method(p.method);

  FitOptions opts;
  opts.xi_lower = cfg.get_double("fit.xi_lower", opts.xi_lower);
  opts.xi_upper = cfg.get_double("fit.xi_upper", opts.xi_upper);
  double quantile = cfg.get_double("fit.threshold_quantile", p.quantile);
  double max_missing = cfg.get_double("fit.max_missing_frac", 0.05);

  std::vector<double> init_beta;
  SmithDispersion init_theta;
  const SmithDispersion* init_theta_ptr = nullptr;
  std::span<const double> init_beta_span;
  if (!p.init.empty()) {
    FitResult warm = read_fit_json(p.init);
    if (warm.beta_hat.size() != design.beta_names().size()) {
      throw UsageError("--init fit has " + std::to_string(warm.beta_hat.size()) +
                       " beta parameters but the config design needs " +
                       std::to_string(design.beta_names().size()));
    }
    init_beta = warm.beta_hat;
    init_beta_span = init_beta;
    init_theta = warm.theta_hat;
    init_theta_ptr = &init_theta;
  }

  FitResult fit;
  std::uint64_t prov_seed = cfg.get_u64("scenario.seed", 0);
  if (method == FitMethod::TwoStep) {
    if (p.panel.empty()) throw UsageError("--panel is required for the two-step fit");
    DailyPanel panel = read_daily_csv(p.panel, sites);
    ThresholdSpec thresholds = load_thresholds(p, sites, panel, quantile);
    BlockMaxima maxima = load_maxima(p, sites, &panel, max_missing);
    fit = fit_two_step(panel, maxima, thresholds, design, sites, init_beta_span, init_theta_ptr,
                       opts);
  } else {
    DailyPanel panel;
    const DailyPanel* panel_ptr = nullptr;
    if (!p.panel.empty()) {
      panel = read_daily_csv(p.panel, sites);
      panel_ptr = &panel;
    }
    BlockMaxima maxima = load_maxima(p, sites, panel_ptr, max_missing);
    fit = fit_pairwise_onestep(maxima, design, sites, init_beta_span, init_theta_ptr, opts);
  }

  Provenance prov{kToolName, cfg.hash_hex(), prov_seed};
  write_fit_json(p.out, fit, prov);
  std::cout << "fit " << method_name(fit.method) << ": converged="
            << (fit.convergence.converged ? "yes" : "no") << ", evaluations="
            << fit.convergence.evaluations;
  if (!fit.convergence.note.empty()) std::cout << " (" << fit.convergence.note << ")";
  std::cout << "\n";
  for (std::size_t i = 0; i < fit.parameter_layout.size(); ++i) {
    std::cout << "  " << fit.parameter_layout[i] << " = " << format_double(fit.eta_hat()[i])
              << "\n";
  }
  return 0;
}

int run_variance(const CommonPaths& p) {
  Config cfg = Config::from_file(p.config);
  SiteCatalog sites = read_catalog_csv(p.catalog);
  MarginalDesign design = design_from_config(cfg);
  FitResult fit = read_fit_json(p.fit);
  AVariant variant = parse_a_variant(p.a_variant);
  double quantile = cfg.get_double("fit.threshold_quantile", p.quantile);
  double max_missing = cfg.get_double("fit.max_missing_frac", 0.05);

  GodambeResult g;
  if (fit.method == FitMethod::TwoStep) {
    if (p.panel.empty()) throw UsageError("--panel is required for two-step variance");
    DailyPanel panel = read_daily_csv(p.panel, sites);
    ThresholdSpec thresholds = load_thresholds(p, sites, panel, quantile);
    BlockMaxima maxima = load_maxima(p, sites, &panel, max_missing);
    Step1Workspace ws(panel, thresholds);
    g = godambe_variance(fit, &ws, maxima, design, sites, variant);
  } else {
    DailyPanel panel;
    const DailyPanel* panel_ptr = nullptr;
    if (!p.panel.empty()) {
      panel = read_daily_csv(p.panel, sites);
      panel_ptr = &panel;
    }
    BlockMaxima maxima = load_maxima(p, sites, panel_ptr, max_missing);
    g = godambe_variance(fit, nullptr, maxima, design, sites, variant);
  }

  Provenance prov{kToolName, cfg.hash_hex(), cfg.get_u64("scenario.seed", 0)};
  write_variance_json(p.out, g, fit, prov);
  std::cout << "sandwich variance (" << a_variant_name(g.variant) << " A), cond(A)="
            << format_double(g.cond_A) << "\n";
  for (std::size_t i = 0; i < fit.parameter_layout.size(); ++i) {
    std::cout << "  se(" << fit.parameter_layout[i] << ") = " << format_double(g.se[i]) << "\n";
  }
  return 0;
}

int run_return_level(const CommonPaths& p) {
  Config cfg = Config::from_file(p.config);
  SiteCatalog sites = read_catalog_csv(p.catalog);
  MarginalDesign design = design_from_config(cfg);
  FitResult fit = read_fit_json(p.fit);
  auto pairs = parse_pairs(p.pairs, sites);
  if (p.period < 2.0) throw UsageError("--period must be at least 2 blocks");
  if (p.draws < 0) throw UsageError("--draws must be >= 0");
  GodambeResult g;
  if (p.draws > 0) {
    if (p.variance.empty()) {
      throw UsageError("--variance is required when --draws > 0");
    }
    g = read_variance_json(p.variance);
  }

  Provenance prov{kToolName, cfg.hash_hex(), p.seed};
  std::string body = prov.comment_line() + "\n";
  body += "site_i,site_j,period,estimate,lower,upper,n_rejected,n_failed\n";
  for (auto [i, j] : pairs) {
    double estimate;
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
    int n_rejected = 0, n_failed = 0;
    if (p.draws > 0) {
      ReturnLevelCI ci =
          joint_return_level_ci(sites, i, j, fit, g, design, p.period, p.draws, p.seed);
      estimate = ci.estimate;
      lower = ci.lower;
      upper = ci.upper;
      n_rejected = ci.n_rejected;
      n_failed = ci.n_failed;
    } else {
      estimate = joint_return_level(sites, i, j, fit.beta_hat, fit.theta_hat, design, p.period);
    }
    body += sites.sites[static_cast<std::size_t>(i)].id + "," +
            sites.sites[static_cast<std::size_t>(j)].id + "," + format_double(p.period) + "," +
            format_double(estimate) + "," + format_double(lower) + "," + format_double(upper) +
            "," + std::to_string(n_rejected) + "," + std::to_string(n_failed) + "\n";
    std::cout << sites.sites[static_cast<std::size_t>(i)].id << ":"
              << sites.sites[static_cast<std::size_t>(j)].id << " T=" << p.period
              << " level=" << format_double(estimate);
    if (p.draws > 0) {
      std::cout << " ci=[" << format_double(lower) << ", " << format_double(upper) << "]";
    }
    std::cout << "\n";
  }
  if (!p.out.empty()) {
    std::ofstream out(p.out);
    if (!out) throw DataError("cannot write file: " + p.out);
    out << body;
    if (!out) throw DataError("failed while writing " + p.out);
  }
  return 0;
}

int run_maxima_draws(const CommonPaths& p) {
  Config cfg = Config::from_file(p.config);
  SiteCatalog sites = read_catalog_csv(p.catalog);
  MarginalDesign design = design_from_config(cfg);
  FitResult fit = read_fit_json(p.fit);
  if (p.draws < 1) throw UsageError("--draws must be >= 1");
  if (p.period < 1.0) throw UsageError("--period must be at least 1 block");

  std::vector<double> values = sample_T_year_maxima_batch(sites, fit.beta_hat, fit.theta_hat,
                                                          design, p.period, p.draws, p.seed);
  Provenance prov{kToolName, cfg.hash_hex(), p.seed};
  std::ofstream out(p.out);
  if (!out) throw DataError("cannot write file: " + p.out);
  out << prov.comment_line() << "\n";
  const std::size_t S = sites.sites.size();
  for (std::size_t s = 0; s < S; ++s) out << (s ? "," : "") << sites.sites[s].id;
  out << "\n";
  for (int d = 0; d < p.draws; ++d) {
    for (std::size_t s = 0; s < S; ++s) {
      out << (s ? "," : "") << format_double(values[static_cast<std::size_t>(d) * S + s]);
    }
    out << "\n";
  }
  if (!out) throw DataError("failed while writing " + p.out);
  std::cout << "wrote " << p.draws << " draws of " << format_double(p.period)
            << "-block maxima over " << S << " sites\n";
  return 0;
}

int run_benchmark_cmd(const CommonPaths& p) {
  Config cfg = Config::from_file(p.config);
  BenchmarkConfig bcfg = benchmark_config_from(cfg);
  BenchmarkResult result = run_benchmark(bcfg);
  Provenance prov{kToolName, cfg.hash_hex(), bcfg.seed};
  write_metrics_csv(p.out, result, prov.comment_line());
  if (!p.log.empty()) {
    std::ofstream log(p.log);
    if (!log) throw DataError("cannot write file: " + p.log);
    for (const auto& line : result.log_lines) log << line << "\n";
    if (!log) throw DataError("failed while writing " + p.log);
  }
  std::cout << "benchmark complete: " << result.rows.size() << " metric rows, "
            << result.log_lines.size() << " replicate records\n";
  return 0;
}

const char* kSchemaFooter =
    R"(input schemas:
  catalog CSV    header: site_id,x1,x2[,cov1,...]; planar coordinates, finite values
  daily CSV      header: site_id,block,day,value; day in 1..m; NA marks missing days
  maxima CSV     header: site_id,block,max; NA marks missing blocks
  thresholds CSV header: site_id,u,quantile_level
  config         flat 'section.key = value' lines; '#' starts a comment
exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("spatmax ") + kToolVersion +
               ": two-step composite likelihood for spatial max-stable extremes"};
  app.footer(kSchemaFooter);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  CommonPaths p;

  auto* sim = app.add_subcommand("simulate", "simulate a daily panel from a study scenario");
  sim->add_option("--config", p.config, "scenario config file")->required();
  sim->add_option("--out-panel", p.out_panel, "daily panel CSV to write");
  sim->add_option("--out-maxima", p.out_maxima, "block maxima CSV to write");
  sim->add_option("--out-catalog", p.out_catalog, "site catalog CSV to write");

  auto* dec = app.add_subcommand("decluster", "runs declustering of threshold exceedances");
  dec->add_option("--catalog", p.catalog, "site catalog CSV")->required();
  dec->add_option("--panel", p.panel, "daily panel CSV")->required();
  dec->add_option("--quantile", p.quantile, "threshold quantile level (default 0.95)");
  dec->add_option("--out-panel", p.out_panel, "declustered daily panel CSV to write");
  dec->add_option("--out-thresholds", p.out_thresholds, "site thresholds CSV to write");

  auto* fit = app.add_subcommand("fit", "fit marginal and dependence parameters");
  fit->add_option("--config", p.config, "config with the design section")->required();
  fit->add_option("--catalog", p.catalog, "site catalog CSV")->required();
  fit->add_option("--panel", p.panel, "daily panel CSV (required for two-step)");
  fit->add_option("--maxima", p.maxima, "block maxima CSV (derived from --panel when absent)");
  fit->add_option("--thresholds", p.thresholds, "thresholds CSV (computed when absent)");
  fit->add_option("--method", p.method, "two-step | pairwise (default two-step)");
  fit->add_option("--init", p.init, "previous fit JSON used as starting values");
  fit->add_option("--out", p.out, "fit JSON to write")->required();

  auto* var = app.add_subcommand("variance", "Godambe sandwich standard errors for a fit");
  var->add_option("--config", p.config, "config with the design section")->required();
  var->add_option("--catalog", p.catalog, "site catalog CSV")->required();
  var->add_option("--fit", p.fit, "fit JSON from the fit command")->required();
  var->add_option("--panel", p.panel, "daily panel CSV (required for two-step fits)");
  var->add_option("--maxima", p.maxima, "block maxima CSV (derived from --panel when absent)");
  var->add_option("--thresholds", p.thresholds, "thresholds CSV (computed when absent)");
  var->add_option("--a-variant", p.a_variant, "fd | bartlett (default fd)");
  var->add_option("--out", p.out, "variance JSON to write")->required();

  auto* rl = app.add_subcommand("return-level", "joint T-block return levels for site pairs");
  rl->add_option("--config", p.config, "config with the design section")->required();
  rl->add_option("--catalog", p.catalog, "site catalog CSV")->required();
  rl->add_option("--fit", p.fit, "fit JSON")->required();
  rl->add_option("--variance", p.variance, "variance JSON (required when --draws > 0)");
  rl->add_option("--pairs", p.pairs, "comma list of SITE_A:SITE_B pairs")->required();
  rl->add_option("--period", p.period, "return period in blocks (default 50)");
  rl->add_option("--draws", p.draws, "normal-approximation draws for the 95% interval");
  rl->add_option("--seed", p.seed, "seed for the draws (default 1)");
  rl->add_option("--out", p.out, "return-level CSV to write");

  auto* md = app.add_subcommand("maxima-draws", "simulate joint T-block maxima at the fit");
  md->add_option("--config", p.config, "config with the design section")->required();
  md->add_option("--catalog", p.catalog, "site catalog CSV")->required();
  md->add_option("--fit", p.fit, "fit JSON")->required();
  md->add_option("--period", p.period, "aggregation period in blocks (default 50)");
  md->add_option("--draws", p.draws, "number of joint draws")->required();
  md->add_option("--seed", p.seed, "seed (default 1)");
  md->add_option("--out", p.out, "CSV to write, one row per draw")->required();

  auto* bench = app.add_subcommand("benchmark", "simulation study over config cells");
  bench->add_option("--config", p.config, "benchmark config file")->required();
  bench->add_option("--out", p.out, "metrics CSV to write")->required();
  bench->add_option("--log", p.log, "JSON-lines replicate log to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    if (code == 0) return 0;
    print_error_record("usage", e.what());
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(p);
    if (dec->parsed()) return run_decluster(p);
    if (fit->parsed()) return run_fit(p);
    if (var->parsed()) return run_variance(p);
    if (rl->parsed()) return run_return_level(p);
    if (md->parsed()) return run_maxima_draws(p);
    if (bench->parsed()) return run_benchmark_cmd(p);
  } catch (const UsageError& e) {
    print_error_record("usage", e.what());
    return 2;
  } catch (const DataError& e) {
    print_error_record("data", e.what());
    return 3;
  } catch (const NumericError& e) {
    print_error_record("numeric", e.what());
    return 4;
  } catch (const Error& e) {
    print_error_record("numeric", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error_record("internal", e.what());
    return 4;
  }
  return 0;
}
