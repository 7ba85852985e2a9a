#include "doctest.h"

#include <cmath>

#include "spatmax/error.hpp"
#include "spatmax/gev.hpp"
#include "spatmax/rng.hpp"

using namespace spatmax;

namespace {

GevParams gp(double mu, double sigma, double xi) { return GevParams{mu, sigma, xi}; }

}  // namespace

TEST_SUITE("gev") {

TEST_CASE("gumbel cdf closed forms") {
  CHECK(std::abs(gev_cdf(1.0, gp(0, 1, 0)) - 0.6922006275553464) < 1e-15);
  CHECK(gev_cdf(0.0, gp(0, 1, 0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("frechet unit case xi = 1") {
  // mu = sigma = xi = 1 gives exactly the unit Frechet law exp(-1/y) on y > 0
  GevParams unit = gp(1, 1, 1);
  CHECK(std::abs(gev_cdf(2.0, unit) - 0.6065306597126334) < 1e-15);
  CHECK(std::abs(gev_cdf(1.0, unit) - 0.36787944117144233) < 1e-15);
  CHECK(gev_cdf(-0.5, unit) == 0.0);
  CHECK(std::abs(gev_to_frechet(3.0, unit) - 3.0) < 1e-14);
}

TEST_CASE("cdf sits at 0/1 outside the support") {
  GevParams heavy = gp(0, 1, 0.5);   // support y > -2
  GevParams bounded = gp(0, 1, -0.5);  // support y < 2
  CHECK(gev_cdf(-2.5, heavy) == 0.0);
  CHECK(gev_cdf(2.5, bounded) == 1.0);
  CHECK(heavy.in_support(-1.9));
  CHECK_FALSE(heavy.in_support(-2.0));
  CHECK(bounded.in_support(1.9));
  CHECK_FALSE(bounded.in_support(2.0));
}

TEST_CASE("quantile and cdf are inverse maps") {
  const double xis[] = {-0.45, -0.2, 0.0, 1e-12, 0.1, 0.4, 1.0};
  const double probs[] = {0.001, 0.01, 0.1, 0.37, 0.5, 0.9, 0.99, 0.999};
  for (double xi : xis) {
    GevParams p = gp(1.5, 2.0, xi);
    for (double prob : probs) {
      double y = gev_quantile(prob, p);
      CHECK(std::abs(gev_cdf(y, p) - prob) < 1e-10);
      double y2 = gev_quantile(gev_cdf(y, p), p);
      CHECK(std::abs(y2 - y) <= 1e-10 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST_CASE("gev_to_frechet and apply_gev_margins are inverse maps") {
  CounterRng rng(911);
  const double xis[] = {-0.4, -0.1, 0.0, 0.05, 0.3, 0.9};
  for (double xi : xis) {
    GevParams p = gp(-0.5, 1.7, xi);
    for (int i = 0; i < 40; ++i) {
      double prob = rng.uniform();
      double y = gev_quantile(prob, p);
      double z = gev_to_frechet(y, p);
      CHECK(z > 0.0);
      // exp(-1/z) reproduces the GEV probability
      CHECK(std::abs(std::exp(-1.0 / z) - prob) < 1e-9);
      double back = apply_gev_margins(z, p);
      CHECK(std::abs(back - y) <= 1e-10 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST_CASE("gumbel crossover is continuous") {
  GevParams exact = gp(0.3, 1.1, 0.0);
  GevParams near = gp(0.3, 1.1, 1e-9);
  for (double y = -2.0; y < 6.0; y += 0.5) {
    CHECK(std::abs(gev_cdf(y, exact) - gev_cdf(y, near)) < 1e-8);
    CHECK(std::abs(gev_to_frechet(y, exact) - gev_to_frechet(y, near)) <
          1e-7 * gev_to_frechet(y, exact));
  }
}

TEST_CASE("frechet_jacobian matches finite differences") {
  const double xis[] = {-0.3, 0.0, 0.2, 0.8};
  for (double xi : xis) {
    GevParams p = gp(0.5, 2.0, xi);
    for (double y : {0.8, 1.5, 3.0}) {
      if (!p.in_support(y)) continue;
      const double h = 1e-6 * std::max(1.0, std::abs(y));
      double fd = (gev_to_frechet(y + h, p) - gev_to_frechet(y - h, p)) / (2 * h);
      double jac = frechet_jacobian(y, p);
      CHECK(std::abs(jac - fd) <= 1e-5 * std::abs(jac));
    }
  }
}

TEST_CASE("support violations throw tagged errors") {
  GevParams heavy = gp(0, 1, 0.5);
  CHECK_THROWS_AS(gev_to_frechet(-2.5, heavy), SupportError);
  try {
    gev_to_frechet(-2.5, heavy, "s07");
    CHECK(false);
  } catch (const SupportError& e) {
    CHECK(e.site_id == "s07");
    CHECK(std::string(e.what()).find("s07") != std::string::npos);
  }
  double z = -1.0;
  CHECK_FALSE(try_gev_to_frechet(-2.5, heavy, z));
  CHECK(z == -1.0);
  CHECK(try_gev_to_frechet(1.0, heavy, z));
  CHECK(z > 0.0);
  CHECK_FALSE(try_gev_to_frechet(std::nan(""), heavy, z));
}

TEST_CASE("parameter validity") {
  CHECK(gp(0, 1, 0.2).valid());
  CHECK_FALSE(gp(0, 0.0, 0.2).valid());
  CHECK_FALSE(gp(0, -1, 0.2).valid());
  CHECK_FALSE(gp(std::nan(""), 1, 0.2).valid());
  CHECK_THROWS_AS(gev_cdf(1.0, gp(0, -1, 0)), Error);
}

}  // TEST_SUITE
