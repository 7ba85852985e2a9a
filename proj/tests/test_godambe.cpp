#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "spatmax/decluster.hpp"
#include "spatmax/error.hpp"
#include "spatmax/fit.hpp"
#include "spatmax/gev.hpp"
#include "spatmax/godambe.hpp"
#include "spatmax/rng.hpp"
#include "spatmax/simulate.hpp"

using namespace spatmax;

namespace {

struct FittedFixture {
  Scenario sc;
  SimulatedData sim;
  ThresholdSpec thresholds;
  Step1Workspace ws;
  FitResult fit;

  FittedFixture()
      : sc(make_scenario()),
        sim(simulate_daily_panel(sc)),
        thresholds(thresholds_from_panel(sim.panel, 0.95)),
        ws(sim.panel, thresholds),
        fit(fit_two_step(sim.panel, sim.maxima, thresholds, sc.design, sc.sites)) {}

  static Scenario make_scenario() {
    Scenario sc;
    // a 3x3 grid keeps several distinct pair directions in the dependent range,
    // so the dispersion block of A stays well conditioned
    sc.sites = grid_catalog(9);
    sc.design.mu_covariates = {0, 1};
    sc.beta_true = {5.0, -0.5, 1.0, 2.5, 0.2};
    sc.sigma_true = SmithDispersion{4.0, 2.0, 4.0};
    sc.n_blocks = 50;
    sc.block_size = 25;
    sc.seed = 777;
    return sc;
  }
};

}  // namespace

TEST_SUITE("godambe") {

TEST_CASE("variant names parse") {
  CHECK(a_variant_name(AVariant::FD) == "fd");
  CHECK(a_variant_name(AVariant::Bartlett) == "bartlett");
  CHECK(parse_a_variant("fd") == AVariant::FD);
  CHECK(parse_a_variant("bartlett") == AVariant::Bartlett);
  CHECK_THROWS_AS(parse_a_variant("hessian"), UsageError);
}

TEST_CASE("B is the average outer product of the stacked scores") {
  BlockScores scores;
  scores.n_blocks = 3;
  scores.dim_beta = 2;
  scores.dim_theta = 3;
  scores.psi1 = {1.0, 2.0, -1.0, 0.5, 0.0, 3.0};
  scores.psi2 = {0.5, 0.0, 1.0, -0.5, 1.0, 0.0, 1.5, -1.0, 2.0};
  scores.phi2 = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  Eigen::MatrixXd B = estimate_B(scores);
  REQUIRE(B.rows() == 5);
  // B(0,0) = mean of psi1[t][0]^2
  CHECK(B(0, 0) == doctest::Approx((1.0 + 1.0 + 0.0) / 3.0).epsilon(1e-14));
  CHECK(B(1, 1) == doctest::Approx((4.0 + 0.25 + 9.0) / 3.0).epsilon(1e-14));
  // B(0,2) = mean of psi1[t][0] * psi2[t][0]
  CHECK(B(0, 2) == doctest::Approx((1.0 * 0.5 + (-1.0) * (-0.5) + 0.0 * 1.5) / 3.0).epsilon(1e-14));
  CHECK((B - B.transpose()).norm() == 0.0);
  // one-step stacking swaps the beta rows for phi2
  Eigen::MatrixXd B1 = estimate_B_onestep(scores);
  CHECK(B1(0, 0) == doctest::Approx((0.01 + 0.09 + 0.25) / 3.0).epsilon(1e-14));
  CHECK(B1(3, 3) == B(3, 3));
}

TEST_CASE("sandwich on scalar matrices") {
  Eigen::MatrixXd A(1, 1), B(1, 1);
  A << 2.0;
  B << 4.0;
  GodambeResult g = sandwich(A, B, 100, AVariant::FD);
  CHECK(g.omega(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(g.se.size() == 1);
  CHECK(g.se[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g.n_blocks == 100);
  CHECK(g.variant == AVariant::FD);
  CHECK(g.cond_A == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sandwich matches the explicit inverse on a 2x2") {
  Eigen::MatrixXd A(2, 2), B(2, 2);
  A << 2.0, 0.0, 1.0, 4.0;
  B << 1.0, 0.5, 0.5, 2.0;
  GodambeResult g = sandwich(A, B, 50, AVariant::Bartlett);
  Eigen::MatrixXd expect = A.inverse() * B * A.inverse().transpose();
  CHECK((g.omega - expect).norm() < 1e-12);
  CHECK((g.omega - g.omega.transpose()).norm() < 1e-14);
  for (int i = 0; i < 2; ++i)
    CHECK(g.se[static_cast<std::size_t>(i)] ==
          doctest::Approx(std::sqrt(expect(i, i) / 50.0)).epsilon(1e-12));
}

TEST_CASE("ill-conditioned A raises and points to the Bartlett variant") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  A(1, 1) = 1e-13;
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
  try {
    sandwich(A, B, 10, AVariant::FD);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("Bartlett") != std::string::npos);
  }
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(sandwich(singular, B, 10, AVariant::FD), NumericError);
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(sandwich(rect, B, 10, AVariant::FD), UsageError);
}

TEST_CASE("one-step information identity holds at the truth") {
  // with two sites the pairwise objective is a genuine likelihood, so the
  // sensitivity and variability matrices agree up to Monte Carlo error;
  // light-tailed margins keep the score outer products well behaved
  SiteCatalog sites;
  sites.sites.push_back({"a", 0.0, 0.0, {}});
  sites.sites.push_back({"b", 1.0, 0.6, {}});
  MarginalDesign design;  // intercept-only margins
  std::vector<double> beta = {2.0, 1.0, 0.1};
  GevParams marg{2.0, 1.0, 0.1};
  SmithDispersion theta{1.0, 0.0, 1.0};
  const int n = 4000;
  std::vector<int> labels(n);
  for (int t = 0; t < n; ++t) labels[t] = t + 1;
  BlockMaxima maxima = BlockMaxima::empty({"a", "b"}, labels, MaximaProvenance::FromSimulation);
  SmithSimContext ctx(sites, theta);
  CounterRng rng(3003);
  std::vector<double> field;
  for (int t = 0; t < n; ++t) {
    ctx.draw(rng, field);
    maxima.at(0, t) = apply_gev_margins(field[0], marg);
    maxima.at(1, t) = apply_gev_margins(field[1], marg);
  }
  Eigen::MatrixXd A = estimate_A_fd_onestep(beta, theta, maxima, design, sites);
  BlockScores scores = block_scores_step2_only(beta, theta, maxima, design, sites);
  Eigen::MatrixXd B = estimate_B_onestep(scores);
  CHECK((A + B).norm() < 0.15 * B.norm());  // A is a Hessian, B an outer product
  // the Bartlett estimate of A agrees too
  DetailScores detail = detail_scores_step2_only(beta, theta, maxima, design, sites);
  Eigen::MatrixXd Ab = estimate_A_bartlett_onestep(detail);
  CHECK((Ab - A).norm() < 0.15 * A.norm());
}

TEST_CASE("two-step A carries the structural zero block") {
  FittedFixture f;
  Eigen::MatrixXd A =
      estimate_A_fd(f.fit.beta_hat, f.fit.theta_hat, f.ws, f.sim.maxima, f.sc.design, f.sc.sites);
  REQUIRE(A.rows() == 8);
  CHECK(A.topRightCorner(5, 3).norm() == 0.0);
  CHECK(A.bottomRightCorner(3, 3).norm() > 0.0);
  CHECK(A.bottomLeftCorner(3, 5).norm() > 0.0);
  Eigen::MatrixXd Ab = estimate_A_bartlett(
      detail_scores(f.fit.beta_hat, f.fit.theta_hat, f.ws, f.sim.maxima, f.sc.design, f.sc.sites));
  CHECK(Ab.topRightCorner(5, 3).norm() == 0.0);
}

TEST_CASE("two-step variance produces usable standard errors") {
  FittedFixture f;
  GodambeResult g =
      godambe_variance(f.fit, &f.ws, f.sim.maxima, f.sc.design, f.sc.sites, AVariant::FD);
  REQUIRE(g.se.size() == 8);
  for (double se : g.se) {
    CHECK(std::isfinite(se));
    CHECK(se > 0.0);
  }
  CHECK((g.omega - g.omega.transpose()).norm() < 1e-10 * g.omega.norm());
  CHECK(g.cond_A < 1e12);
  CHECK(g.n_blocks == 50);
  // the beta block should be in a plausible range for n = 50 blocks
  CHECK(g.se[0] < 5.0);
  CHECK(g.se[0] > 0.01);
  // Bartlett variant runs on the same fit and lands within a small factor
  GodambeResult gb =
      godambe_variance(f.fit, &f.ws, f.sim.maxima, f.sc.design, f.sc.sites, AVariant::Bartlett);
  CHECK(gb.variant == AVariant::Bartlett);
  for (std::size_t i = 0; i < g.se.size(); ++i) {
    CHECK(gb.se[i] > 0.0);
    CHECK(std::abs(std::log(gb.se[i] / g.se[i])) < std::log(3.0));
  }
}

TEST_CASE("two-step variance requires the daily panel workspace") {
  FittedFixture f;
  CHECK_THROWS_AS(
      godambe_variance(f.fit, nullptr, f.sim.maxima, f.sc.design, f.sc.sites, AVariant::FD),
      UsageError);
}

TEST_CASE("one-step variance runs without a workspace") {
  FittedFixture f;
  FitResult fit = fit_pairwise_onestep(f.sim.maxima, f.sc.design, f.sc.sites);
  GodambeResult g =
      godambe_variance(fit, nullptr, f.sim.maxima, f.sc.design, f.sc.sites, AVariant::FD);
  REQUIRE(g.se.size() == 8);
  for (double se : g.se) CHECK(se > 0.0);
}

}  // TEST_SUITE
