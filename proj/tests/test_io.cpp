#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "spatmax/decluster.hpp"
#include "spatmax/error.hpp"
#include "spatmax/io.hpp"
#include "spatmax/version.hpp"
#include "test_helpers.hpp"

using namespace spatmax;

namespace {

const double kNA = std::numeric_limits<double>::quiet_NaN();

Provenance test_prov() { return Provenance{kToolName + std::string(" ") + kToolVersion, "0123456789abcdef", 42}; }

SiteCatalog two_sites() {
  SiteCatalog cat;
  cat.sites.push_back({"a", 0.0, 0.5, {0.0, 0.5}});
  cat.sites.push_back({"b", 1.25, -3.0, {1.25, -3.0}});
  return cat;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double is a shortest round-trip representation") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
  CHECK(format_double(kNA) == "NA");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  double v = 6.558366316313641;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("provenance comment line carries tool, hash and seed") {
  std::string line = test_prov().comment_line();
  CHECK(line.rfind("#", 0) == 0);
  CHECK(line.find("spatmax") != std::string::npos);
  CHECK(line.find("0123456789abcdef") != std::string::npos);
  CHECK(line.find("42") != std::string::npos);
}

TEST_CASE("site catalog round trips through csv") {
  testutil::TempDir dir("io_catalog");
  std::string path = dir.file("catalog.csv");
  SiteCatalog cat = two_sites();
  write_catalog_csv(path, cat, test_prov());
  std::string text = testutil::read_text(path);
  CHECK(text.rfind("#", 0) == 0);  // provenance first
  SiteCatalog back = read_catalog_csv(path);
  REQUIRE(back.size() == 2);
  for (int s = 0; s < 2; ++s) {
    CHECK(back.sites[s].id == cat.sites[s].id);
    CHECK(back.sites[s].x1 == cat.sites[s].x1);
    CHECK(back.sites[s].x2 == cat.sites[s].x2);
    CHECK(back.sites[s].covariates == cat.sites[s].covariates);
  }
}

TEST_CASE("daily panel round trips with missing cells") {
  testutil::TempDir dir("io_daily");
  std::string path = dir.file("daily.csv");
  SiteCatalog cat = two_sites();
  DailyPanel panel = DailyPanel::empty({"a", "b"}, {3, 7}, 4);
  int v = 0;
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      for (int k = 0; k < 4; ++k) panel.at(s, t, k) = 0.25 * ++v;
  panel.at(0, 1, 2) = kNA;
  write_daily_csv(path, panel, test_prov());
  DailyPanel back = read_daily_csv(path, cat);
  CHECK(back.n_sites() == 2);
  CHECK(back.n_blocks == 2);
  CHECK(back.block_size == 4);
  CHECK(back.block_labels == std::vector<int>{3, 7});
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      for (int k = 0; k < 4; ++k) {
        if (s == 0 && t == 1 && k == 2) {
          CHECK(is_missing(back.at(s, t, k)));
        } else {
          CHECK(back.at(s, t, k) == panel.at(s, t, k));
        }
      }
}

TEST_CASE("daily reader reports the offending line") {
  testutil::TempDir dir("io_daily_err");
  SiteCatalog cat = two_sites();
  std::string path = dir.file("bad.csv");
  testutil::write_text(path, "site_id,block,day,value\na,1,1,2.5\na,1,1,3.5\n");
  try {
    read_daily_csv(path, cat);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);  // offending line number
  }
  std::string path2 = dir.file("badval.csv");
  testutil::write_text(path2, "site_id,block,day,value\na,1,x,2.5\n");
  CHECK_THROWS_AS(read_daily_csv(path2, cat), DataError);
  std::string path3 = dir.file("unknown.csv");
  testutil::write_text(path3, "site_id,block,day,value\nzz,1,1,2.5\n");
  CHECK_THROWS_AS(read_daily_csv(path3, cat), DataError);
  std::string path4 = dir.file("header.csv");
  testutil::write_text(path4, "site_id,day,value\na,1,2.5\n");
  CHECK_THROWS_AS(read_daily_csv(path4, cat), DataError);
}

TEST_CASE("block maxima round trip, NA preserved") {
  testutil::TempDir dir("io_maxima");
  std::string path = dir.file("maxima.csv");
  SiteCatalog cat = two_sites();
  BlockMaxima bm = BlockMaxima::empty({"a", "b"}, {1, 2, 5}, MaximaProvenance::FromPanel);
  bm.at(0, 0) = 3.5;
  bm.at(0, 1) = kNA;
  bm.at(0, 2) = 4.25;
  bm.at(1, 0) = -1.5;
  bm.at(1, 1) = 2.0;
  bm.at(1, 2) = 0.125;
  write_maxima_csv(path, bm, test_prov());
  BlockMaxima back = read_maxima_csv(path, cat);
  CHECK(back.block_labels == std::vector<int>{1, 2, 5});
  CHECK(back.at(0, 0) == 3.5);
  CHECK(is_missing(back.at(0, 1)));
  CHECK(back.at(1, 2) == 0.125);
}

TEST_CASE("thresholds round trip") {
  testutil::TempDir dir("io_thresholds");
  std::string path = dir.file("u.csv");
  SiteCatalog cat = two_sites();
  ThresholdSpec spec;
  spec.u = {2.5, 3.75};
  spec.quantile_level = 0.9;
  write_thresholds_csv(path, cat, spec, test_prov());
  ThresholdSpec back = read_thresholds_csv(path, cat);
  CHECK(back.u == spec.u);
  CHECK(back.quantile_level == spec.quantile_level);
}

TEST_CASE("config parsing and typed getters") {
  Config cfg = Config::from_text(
      "# comment\n"
      "scenario.model = 1\n"
      "scenario.seed = 20230815\n"
      "fit.threshold_quantile = 0.95  # trailing comment\n"
      "design.mu = 0,1\n"
      "benchmark.methods = both\n");
  CHECK(cfg.has("scenario.model"));
  CHECK_FALSE(cfg.has("scenario.sites"));
  CHECK(cfg.get_int("scenario.model") == 1);
  CHECK(cfg.get_int("missing.key", 7) == 7);
  CHECK(cfg.get_double("fit.threshold_quantile") == 0.95);
  CHECK(cfg.get_u64("scenario.seed", 0) == 20230815ULL);
  CHECK(cfg.get_string("benchmark.methods") == "both");
  CHECK(cfg.get_int_list("design.mu", {}) == std::vector<long long>{0, 1});
  CHECK(cfg.get_int_list("design.sigma", {5}) == std::vector<long long>{5});
  CHECK_THROWS_AS(cfg.get_int("benchmark.methods"), UsageError);
  CHECK_THROWS_AS(cfg.get_string("missing.key"), UsageError);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(Config::from_text("novalue\n"), DataError);
  CHECK_THROWS_AS(Config::from_text("a.b = 1\na.b = 2\n"), DataError);
  CHECK_THROWS_AS(Config::from_text("bad key! = 1\n"), DataError);
  CHECK_THROWS_AS(Config::from_file("/nonexistent/spatmax.cfg"), DataError);
}

TEST_CASE("config hash is FNV-1a over the raw bytes") {
  CHECK(Config::from_text("").hash_hex() == "cbf29ce484222325");  // offset basis
  // FNV-1a of "a" = (basis ^ 0x61) * prime
  CHECK(Config::from_text("a.b=1").hash_hex() != Config::from_text("a.b=2").hash_hex());
  CHECK(Config::from_text("x.y = 3").hash_hex() == Config::from_text("x.y = 3").hash_hex());
  CHECK(Config::from_text("").hash_hex().size() == 16);
}

TEST_CASE("design_from_config maps covariate lists") {
  Config cfg = Config::from_text("design.mu = 0,1\ndesign.sigma = 0\n");
  MarginalDesign d = design_from_config(cfg);
  CHECK(d.mu_covariates == std::vector<int>{0, 1});
  CHECK(d.sigma_covariates == std::vector<int>{0});
  CHECK(d.xi_covariates.empty());
  CHECK(d.n_beta() == 6);
  MarginalDesign plain = design_from_config(Config::from_text(""));
  CHECK(plain.n_beta() == 3);
  CHECK_THROWS_AS(design_from_config(Config::from_text("design.mu = -1\n")), UsageError);
  CHECK_THROWS_AS(design_from_config(Config::from_text("design.link = log\n")), UsageError);
}

TEST_CASE("fit result round trips through json") {
  testutil::TempDir dir("io_fit");
  std::string path = dir.file("fit.json");
  FitResult fit;
  fit.method = FitMethod::TwoStep;
  fit.beta_hat = {5.0, -0.5, 1.0, 2.5, 0.2};
  fit.theta_hat = SmithDispersion{4.0, 2.0, 4.0};
  fit.nll_step1 = 123.456;
  fit.nll_step2 = kNA;  // pairwise fits leave step-1 empty, exercise NaN
  fit.convergence.converged = true;
  fit.convergence.iterations = 321;
  fit.convergence.evaluations = 654;
  fit.convergence.grad_norm = 1e-5;
  fit.convergence.note = "";
  fit.parameter_layout = {"beta_mu_0", "beta_mu_1", "beta_mu_2",
                          "beta_sigma_0", "beta_xi_0", "sigma11", "sigma12", "sigma22"};
  write_fit_json(path, fit, test_prov());
  FitResult back = read_fit_json(path);
  CHECK(back.method == FitMethod::TwoStep);
  CHECK(back.beta_hat == fit.beta_hat);
  CHECK(back.theta_hat.sigma11 == 4.0);
  CHECK(back.theta_hat.sigma12 == 2.0);
  CHECK(back.nll_step1 == 123.456);
  CHECK(std::isnan(back.nll_step2));
  CHECK(back.convergence.converged);
  CHECK(back.convergence.iterations == 321);
  CHECK(back.parameter_layout == fit.parameter_layout);
}

TEST_CASE("variance result round trips through json") {
  testutil::TempDir dir("io_var");
  std::string path = dir.file("variance.json");
  FitResult fit;
  fit.method = FitMethod::TwoStep;
  fit.beta_hat = {1.0, 2.0};
  fit.theta_hat = SmithDispersion{1.0, 0.0, 1.0};
  fit.parameter_layout = {"beta_mu_0", "beta_sigma_0", "sigma11", "sigma12", "sigma22"};
  GodambeResult g;
  g.A = Eigen::MatrixXd::Identity(5, 5) * -2.0;
  g.B = Eigen::MatrixXd::Identity(5, 5) * 4.0;
  g.omega = Eigen::MatrixXd::Identity(5, 5);
  g.omega(0, 1) = 0.25;
  g.omega(1, 0) = 0.25;
  g.se = {0.1, 0.2, 0.3, 0.4, 0.5};
  g.variant = AVariant::Bartlett;
  g.n_blocks = 77;
  g.cond_A = 12.5;
  write_variance_json(path, g, fit, test_prov());
  GodambeResult back = read_variance_json(path);
  CHECK(back.n_blocks == 77);
  CHECK(back.variant == AVariant::Bartlett);
  CHECK(back.cond_A == 12.5);
  CHECK(back.se == g.se);
  CHECK((back.omega - g.omega).norm() == 0.0);
  CHECK((back.A - g.A).norm() == 0.0);
  CHECK((back.B - g.B).norm() == 0.0);
}

TEST_CASE("csv readers skip comment lines anywhere") {
  testutil::TempDir dir("io_comments");
  SiteCatalog cat = two_sites();
  std::string path = dir.file("u.csv");
  testutil::write_text(path,
                       "# provenance\nsite_id,u,quantile_level\n# interior\na,1.5,0.95\nb,2.5,0.95\n");
  ThresholdSpec spec = read_thresholds_csv(path, cat);
  CHECK(spec.u == std::vector<double>{1.5, 2.5});
  CHECK(spec.quantile_level == 0.95);
}

}  // TEST_SUITE
