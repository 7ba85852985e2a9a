#include "doctest.h"

#include <limits>
#include <vector>

#include "spatmax/design.hpp"
#include "spatmax/error.hpp"

using namespace spatmax;

TEST_SUITE("design") {

TEST_CASE("link parsing") {
  CHECK(parse_link("identity") == Link::Identity);
  CHECK(link_name(Link::Identity) == "identity");
  CHECK_THROWS_AS(parse_link("log"), UsageError);
}

TEST_CASE("beta layout and names") {
  MarginalDesign d;
  d.mu_covariates = {0, 1};
  d.sigma_covariates = {};
  d.xi_covariates = {};
  CHECK(d.n_mu() == 3);
  CHECK(d.n_sigma() == 1);
  CHECK(d.n_xi() == 1);
  CHECK(d.n_beta() == 5);
  auto names = d.beta_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "beta_mu_0");
  CHECK(names[1] == "beta_mu_1");
  CHECK(names[2] == "beta_mu_2");
  CHECK(names[3] == "beta_sigma_0");
  CHECK(names[4] == "beta_xi_0");
}

TEST_CASE("grid catalog layout") {
  SiteCatalog cat = grid_catalog(9);
  REQUIRE(cat.size() == 9);
  cat.validate();
  CHECK(cat.covariate_dim() == 2);
  CHECK(cat.sites[0].id == "s01");
  CHECK(cat.sites[0].x1 == -5.0);
  CHECK(cat.sites[0].x2 == -5.0);
  CHECK(cat.sites[1].x1 == -5.0);
  CHECK(cat.sites[1].x2 == 0.0);
  CHECK(cat.sites[3].x1 == 0.0);
  CHECK(cat.sites[3].x2 == -5.0);
  CHECK(cat.sites[8].id == "s09");
  CHECK(cat.sites[8].x1 == 5.0);
  CHECK(cat.sites[8].x2 == 5.0);
  for (const Site& s : cat.sites) {
    REQUIRE(s.covariates.size() == 2);
    CHECK(s.covariates[0] == s.x1);
    CHECK(s.covariates[1] == s.x2);
  }
  SiteCatalog one = grid_catalog(1);
  CHECK(one.sites[0].x1 == 0.0);
  CHECK(one.sites[0].x2 == 0.0);
  CHECK_THROWS_AS(grid_catalog(7), UsageError);
  CHECK_THROWS_AS(grid_catalog(0), UsageError);
}

TEST_CASE("catalog validation") {
  SiteCatalog cat;
  CHECK_THROWS_AS(cat.validate(), DataError);
  cat.sites.push_back({"a", 0.0, 0.0, {1.0}});
  cat.sites.push_back({"a", 1.0, 0.0, {2.0}});
  CHECK_THROWS_AS(cat.validate(), DataError);
  cat.sites[1].id = "b";
  cat.sites[1].covariates = {2.0, 3.0};
  CHECK_THROWS_AS(cat.validate(), DataError);
  cat.sites[1].covariates = {2.0};
  cat.validate();
  cat.sites[1].x1 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(cat.validate(), DataError);
}

TEST_CASE("marginal parameters from the linear predictors") {
  MarginalDesign d;
  d.mu_covariates = {0, 1};
  std::vector<double> beta = {5.0, -0.5, 1.0, 2.5, 0.2};
  std::vector<double> x = {2.0, -3.0};
  GevParams p = marginal_params_at_site(x, beta, d);
  CHECK(p.mu == doctest::Approx(5.0 - 1.0 - 3.0).epsilon(1e-15));
  CHECK(p.sigma == 2.5);
  CHECK(p.xi == 0.2);

  MarginalDesign d2;
  d2.mu_covariates = {0, 1};
  d2.sigma_covariates = {0, 1};
  std::vector<double> beta2 = {5.0, -0.5, 1.0, 2.5, -0.2, 0.2, 0.2};
  GevParams q = marginal_params_at_site(x, beta2, d2);
  CHECK(q.mu == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.sigma == doctest::Approx(2.5 - 0.4 - 0.6).epsilon(1e-15));
  CHECK(q.xi == 0.2);
}

TEST_CASE("invalid sigma names the site") {
  MarginalDesign d;
  std::vector<double> beta = {0.0, -1.0, 0.1};
  std::vector<double> x = {};
  try {
    marginal_params_at_site(x, beta, d, "s05");
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("s05") != std::string::npos);
  }
}

TEST_CASE("beta length mismatch is rejected") {
  MarginalDesign d;
  std::vector<double> beta = {0.0, 1.0};
  std::vector<double> x = {};
  CHECK_THROWS_AS(marginal_params_at_site(x, beta, d), DataError);
}

TEST_CASE("design referencing a missing covariate is rejected") {
  MarginalDesign d;
  d.mu_covariates = {4};
  std::vector<double> beta = {0.0, 1.0, 1.0, 0.1};
  std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(marginal_params_at_site(x, beta, d), DataError);
}

TEST_CASE("site_margins and the non-throwing variant agree") {
  SiteCatalog cat = grid_catalog(4);
  MarginalDesign d;
  d.mu_covariates = {0, 1};
  std::vector<double> beta = {5.0, -0.5, 1.0, 2.5, 0.2};
  auto margins = site_margins(cat, beta, d);
  std::vector<GevParams> out;
  REQUIRE(try_site_margins(cat, beta, d, out));
  REQUIRE(out.size() == margins.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].mu == margins[i].mu);
    CHECK(out[i].sigma == margins[i].sigma);
    CHECK(out[i].xi == margins[i].xi);
  }
  // make sigma negative at one site via a covariate-loaded sigma
  MarginalDesign bad;
  bad.sigma_covariates = {0};
  std::vector<double> beta_bad = {1.0, 1.0, 1.0, 0.1};  // sigma = 1 + x1, x1 = -5 at site 1
  CHECK_FALSE(try_site_margins(cat, beta_bad, bad, out));
  CHECK_THROWS_AS(site_margins(cat, beta_bad, bad), NumericError);
}

}  // TEST_SUITE
