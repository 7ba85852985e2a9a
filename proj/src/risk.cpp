#include "spatmax/risk.hpp"

#include <algorithm>
#include <cmath>

#include "spatmax/error.hpp"
#include "spatmax/mathutil.hpp"
#include "spatmax/optim.hpp"
#include "spatmax/simulate.hpp"

namespace spatmax {

namespace {

double joint_exceedance(double y, const GevParams& p1, const GevParams& p2, double a) {
  const double g1 = gev_cdf(y, p1);
  const double g2 = gev_cdf(y, p2);
  double f12;
  if (p1.in_support(y) && p2.in_support(y)) {
    f12 = bivariate_cdf_frechet(gev_to_frechet(y, p1), gev_to_frechet(y, p2), a);
  } else if (g1 == 0.0 || g2 == 0.0) {
    f12 = 0.0;
  } else {
    // one margin is at or above its upper endpoint
    f12 = std::min(g1, g2);
  }
  return 1.0 - g1 - g2 + f12;
}

}  // namespace

double joint_return_level(const SiteCatalog& sites, int site_i, int site_j,
                          std::span<const double> beta, const SmithDispersion& theta,
                          const MarginalDesign& design, double T) {
  if (!(T >= 2.0)) throw UsageError("return period must be at least 2");
  const int S = static_cast<int>(sites.size());
  if (site_i < 0 || site_j < 0 || site_i >= S || site_j >= S || site_i == site_j)
    throw UsageError("invalid site pair for the joint return level");
  const GevParams p1 =
      marginal_params_at_site(sites.sites[site_i].covariates, beta, design, sites.sites[site_i].id);
  const GevParams p2 =
      marginal_params_at_site(sites.sites[site_j].covariates, beta, design, sites.sites[site_j].id);
  const double a = mahalanobis_a(sites.sites[site_i].x1 - sites.sites[site_j].x1,
                                 sites.sites[site_i].x2 - sites.sites[site_j].x2, theta);
  const double target = 1.0 / T;
  const auto g = [&](double y) { return joint_exceedance(y, p1, p2, a) - target; };

  const double rl_max =
      std::max(gev_quantile(1.0 - target, p1), gev_quantile(1.0 - target, p2));
  double lo, hi;
  if (rl_max > 0.0) {
    lo = rl_max / 10.0;
    hi = rl_max * 100.0;
  } else {
    const double w = std::max(1.0, p1.sigma + p2.sigma);
    lo = rl_max - 10.0 * w;
    hi = rl_max + 10.0 * w;
  }
  int expansions = 0;
  while (g(lo) < 0.0) {
    lo = rl_max > 0.0 ? lo / 10.0 : lo - std::max(1.0, std::abs(lo));
    if (++expansions > 60)
      throw NumericError("could not bracket the joint return level from below");
  }
  while (g(hi) > 0.0) {
    hi = rl_max > 0.0 ? hi * 10.0 : hi + std::max(1.0, std::abs(hi));
    if (++expansions > 120)
      throw NumericError(
          "simultaneous exceedance stays above 1/T over the whole bracket; no return level");
  }
  return brent_root(g, lo, hi, 1e-8);
}

ParamDraws draw_params(const FitResult& fit, const GodambeResult& godambe,
                       const MarginalDesign& design, const SiteCatalog& sites, int n_draws,
                       CounterRng& rng, const FitOptions& opts) {
  if (n_draws < 1) throw UsageError("need at least one draw");
  const std::vector<double> eta = fit.eta_hat();
  const int dim = static_cast<int>(eta.size());
  if (godambe.omega.rows() != dim)
    throw UsageError("variance matrix dimension does not match the fit");

  Eigen::MatrixXd cov = godambe.omega / godambe.n_blocks;
  ParamDraws out;
  Eigen::MatrixXd factor;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
    factor = es.eigenvectors() * clamped.cwiseSqrt().asDiagonal();
    out.psd_repaired = true;
  }

  const int nb = design.n_beta();
  Eigen::VectorXd zeta(dim);
  std::vector<double> beta(static_cast<std::size_t>(nb));
  std::vector<GevParams> margins;
  out.draws.reserve(static_cast<std::size_t>(n_draws));
  long long attempts = 0;
  while (static_cast<int>(out.draws.size()) < n_draws) {
    if (++attempts > 2LL * n_draws && out.draws.size() < static_cast<std::size_t>(n_draws)) {
      throw NumericError(
          "more than half of the normal-approximation draws are infeasible; the asymptotic "
          "approximation is unusable at this fit");
    }
    for (int i = 0; i < dim; ++i) zeta[i] = rng.normal();
    const Eigen::VectorXd shift = factor * zeta;
    std::vector<double> draw(eta);
    for (int i = 0; i < dim; ++i) draw[static_cast<std::size_t>(i)] += shift[i];

    std::copy(draw.begin(), draw.begin() + nb, beta.begin());
    bool ok = try_site_margins(sites, beta, design, margins);
    if (ok) {
      for (const GevParams& p : margins) {
        if (!(p.xi > opts.xi_lower) || !(p.xi < opts.xi_upper)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      const SmithDispersion th{draw[static_cast<std::size_t>(nb)],
                               draw[static_cast<std::size_t>(nb) + 1],
                               draw[static_cast<std::size_t>(nb) + 2]};
      ok = th.valid();
    }
    if (!ok) {
      ++out.n_rejected;
      continue;
    }
    out.draws.push_back(std::move(draw));
  }
  return out;
}

std::vector<double> sample_T_year_maxima(const SiteCatalog& sites, std::span<const double> beta,
                                         const SmithDispersion& theta,
                                         const MarginalDesign& design, double T, CounterRng& rng) {
  if (!(T >= 1.0)) throw UsageError("period must be at least 1");
  const std::vector<GevParams> margins = site_margins(sites, beta, design);
  std::vector<double> field = simulate_smith_field(sites, theta, rng);
  for (std::size_t s = 0; s < field.size(); ++s) {
    field[s] = apply_gev_margins(T * field[s], margins[s]);
  }
  return field;
}

std::vector<double> sample_T_year_maxima_batch(const SiteCatalog& sites,
                                               std::span<const double> beta,
                                               const SmithDispersion& theta,
                                               const MarginalDesign& design, double T, int n_draws,
                                               std::uint64_t seed) {
  if (n_draws < 1) throw UsageError("need at least one draw");
  const std::vector<GevParams> margins = site_margins(sites, beta, design);
  const SmithSimContext ctx(sites, theta);
  const int S = static_cast<int>(sites.size());
  std::vector<double> out(static_cast<std::size_t>(n_draws) * S);
  std::vector<double> field;
  for (int d = 0; d < n_draws; ++d) {
    CounterRng rng = CounterRng::keyed(seed, {kStreamRisk, static_cast<std::uint64_t>(d)});
    ctx.draw(rng, field);
    for (int s = 0; s < S; ++s) {
      out[static_cast<std::size_t>(d) * S + s] = apply_gev_margins(T * field[s], margins[s]);
    }
  }
  return out;
}

ReturnLevelCI joint_return_level_ci(const SiteCatalog& sites, int site_i, int site_j,
                                    const FitResult& fit, const GodambeResult& godambe,
                                    const MarginalDesign& design, double T, int n_draws,
                                    std::uint64_t seed, const FitOptions& opts) {
  ReturnLevelCI out;
  out.estimate =
      joint_return_level(sites, site_i, site_j, fit.beta_hat, fit.theta_hat, design, T);
  CounterRng rng = CounterRng::keyed(seed, {kStreamDraws});
  const ParamDraws draws = draw_params(fit, godambe, design, sites, n_draws, rng, opts);
  out.n_rejected = draws.n_rejected;
  const int nb = design.n_beta();
  out.draws.reserve(draws.draws.size());
  for (const std::vector<double>& eta : draws.draws) {
    const std::span<const double> beta(eta.data(), static_cast<std::size_t>(nb));
    const SmithDispersion th{eta[static_cast<std::size_t>(nb)],
                             eta[static_cast<std::size_t>(nb) + 1],
                             eta[static_cast<std::size_t>(nb) + 2]};
    try {
      out.draws.push_back(joint_return_level(sites, site_i, site_j, beta, th, design, T));
    } catch (const NumericError&) {
      ++out.n_failed;
    }
  }
  if (out.draws.empty()) throw NumericError("all return-level draws failed");
  out.lower = empirical_quantile(out.draws, 0.025);
  out.upper = empirical_quantile(out.draws, 0.975);
  return out;
}

}  // namespace spatmax
