#include "spatmax/fit.hpp"

#include <algorithm>
#include <cmath>

#include "spatmax/error.hpp"
#include "spatmax/mathutil.hpp"

namespace spatmax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double nll_from_blocks(const std::vector<double>& blocks) {
  KahanSum sum;
  for (double v : blocks) sum.add(v);
  return -sum.value();
}

bool margins_in_box(const std::vector<GevParams>& margins, const FitOptions& opts) {
  for (const GevParams& p : margins) {
    if (!(p.xi > opts.xi_lower) || !(p.xi < opts.xi_upper)) return false;
  }
  return true;
}

bool margins_on_boundary(const std::vector<GevParams>& margins, const FitOptions& opts) {
  for (const GevParams& p : margins) {
    if (std::abs(p.xi - opts.xi_lower) < opts.boundary_tol ||
        std::abs(p.xi - opts.xi_upper) < opts.boundary_tol)
      return true;
  }
  return false;
}

double fd_grad_norm(const Objective& f, std::span<const double> x) {
  const std::vector<double> g = fd_gradient(f, x, 1e-6);
  double norm = 0.0;
  for (double v : g) norm = std::max(norm, std::abs(v));
  return norm;
}

Convergence stage_convergence(const NelderMeadResult& nm, const Objective& f) {
  Convergence conv;
  conv.converged = nm.converged;
  conv.iterations = nm.iterations;
  conv.evaluations = nm.evaluations;
  conv.grad_norm = fd_grad_norm(f, nm.x);
  return conv;
}

std::vector<double> pooled_maxima(const BlockMaxima& maxima) {
  std::vector<double> pooled;
  for (double v : maxima.values) {
    if (!is_missing(v)) pooled.push_back(v);
  }
  if (pooled.empty()) throw DataError("no observed block maxima to initialize from");
  return pooled;
}

std::vector<double> init_from_pool(std::vector<double> pooled, const MarginalDesign& design) {
  const double mu0 = sample_median(pooled);
  double sigma0 = sample_iqr(pooled) / 1.35;
  if (!(sigma0 > 0.0)) sigma0 = 1.0;
  std::vector<double> beta(static_cast<std::size_t>(design.n_beta()), 0.0);
  beta[0] = mu0;
  beta[static_cast<std::size_t>(design.n_mu())] = sigma0;
  beta[static_cast<std::size_t>(design.n_mu() + design.n_sigma())] = 0.1;
  return beta;
}

}  // namespace

std::string method_name(FitMethod m) {
  return m == FitMethod::TwoStep ? "TWO_STEP" : "PAIRWISE_ONESTEP";
}

FitMethod parse_method(const std::string& name) {
  if (name == "TWO_STEP" || name == "two-step") return FitMethod::TwoStep;
  if (name == "PAIRWISE_ONESTEP" || name == "pairwise") return FitMethod::PairwiseOnestep;
  throw UsageError("unknown fit method '" + name + "' (expected two-step or pairwise)");
}

std::vector<double> FitResult::eta_hat() const {
  std::vector<double> eta(beta_hat);
  eta.push_back(theta_hat.sigma11);
  eta.push_back(theta_hat.sigma12);
  eta.push_back(theta_hat.sigma22);
  return eta;
}

std::vector<double> default_init_beta(const BlockMaxima& maxima, const MarginalDesign& design) {
  return init_from_pool(pooled_maxima(maxima), design);
}

std::vector<double> default_init_beta(const DailyPanel& panel, const MarginalDesign& design) {
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(panel.n_sites()) * panel.n_blocks);
  for (int s = 0; s < panel.n_sites(); ++s) {
    for (int t = 0; t < panel.n_blocks; ++t) {
      double best = -kInf;
      for (int k = 0; k < panel.block_size; ++k) {
        const double v = panel.at(s, t, k);
        if (!is_missing(v)) best = std::max(best, v);
      }
      if (best > -kInf) pooled.push_back(best);
    }
  }
  if (pooled.empty()) throw DataError("no observed data to initialize from");
  return init_from_pool(std::move(pooled), design);
}

SmithDispersion default_init_theta(const SiteCatalog& sites) {
  const int S = static_cast<int>(sites.size());
  if (S < 2) throw DataError("dispersion initialization needs at least two sites");
  double mean_nn = 0.0;
  for (int i = 0; i < S; ++i) {
    double nn = kInf;
    for (int j = 0; j < S; ++j) {
      if (i == j) continue;
      const double d1 = sites.sites[i].x1 - sites.sites[j].x1;
      const double d2 = sites.sites[i].x2 - sites.sites[j].x2;
      nn = std::min(nn, std::sqrt(d1 * d1 + d2 * d2));
    }
    mean_nn += nn;
  }
  mean_nn /= S;
  if (!(mean_nn > 0.0)) throw DataError("sites with coincident coordinates");
  return SmithDispersion{mean_nn * mean_nn, 0.0, mean_nn * mean_nn};
}

std::array<double, 3> theta_to_logchol(const SmithDispersion& theta) {
  if (!theta.valid()) throw NumericError("dispersion matrix is not positive definite");
  const double l11 = std::sqrt(theta.sigma11);
  const double l21 = theta.sigma12 / l11;
  const double l22 = std::sqrt(theta.sigma22 - l21 * l21);
  return {std::log(l11), l21, std::log(l22)};
}

SmithDispersion logchol_to_theta(std::span<const double> phi) {
  const double l11 = std::exp(phi[0]);
  const double l21 = phi[1];
  const double l22 = std::exp(phi[2]);
  return SmithDispersion{l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
}

StageResult fit_step1(const Step1Workspace& ws, const MarginalDesign& design,
                      const SiteCatalog& sites, std::span<const double> init_beta,
                      const FitOptions& opts) {
  std::vector<GevParams> margins;
  const Objective objective = [&](std::span<const double> beta) {
    if (!try_site_margins(sites, beta, design, margins)) return kInf;
    if (!margins_in_box(margins, opts)) return kInf;
    return step1_nll(beta, ws, design, sites);
  };
  if (!std::isfinite(objective(init_beta)))
    throw NumericError(
        "step-1 starting point is infeasible; the data-driven default initialization "
        "(pooled block-maxima moments) is recommended");
  NelderMeadResult nm = nelder_mead(objective, init_beta, opts.nm);
  StageResult out;
  out.x = nm.x;
  out.nll = nm.fmin;
  out.conv = stage_convergence(nm, objective);
  try_site_margins(sites, out.x, design, margins);
  if (margins_on_boundary(margins, opts)) {
    out.conv.converged = false;
    out.conv.note = "xi estimate on the optimization box boundary";
  }
  return out;
}

StageResult fit_step1(const DailyPanel& panel, const ThresholdSpec& thresholds,
                      const MarginalDesign& design, const SiteCatalog& sites,
                      std::span<const double> init_beta, const FitOptions& opts) {
  const Step1Workspace ws(panel, thresholds);
  std::vector<double> init(init_beta.begin(), init_beta.end());
  if (init.empty()) init = default_init_beta(panel, design);
  return fit_step1(ws, design, sites, init, opts);
}

StageResult fit_step2(const BlockMaxima& maxima, std::span<const double> beta_hat,
                      const SiteCatalog& sites, const MarginalDesign& design,
                      const SmithDispersion* init_theta, const FitOptions& opts) {
  const std::vector<GevParams> margins = site_margins(sites, beta_hat, design);
  for (int s = 0; s < maxima.n_sites(); ++s) {
    for (int t = 0; t < maxima.n_blocks; ++t) {
      const double m = maxima.at(s, t);
      if (is_missing(m)) continue;
      if (!margins[s].in_support(m))
        throw NumericError("block maximum at site " + maxima.site_ids[s] + ", block " +
                           std::to_string(maxima.block_labels[t]) +
                           " lies outside the fitted margin's support");
    }
  }
  FrechetCache cache;
  if (!build_frechet_cache(maxima, margins, cache))
    throw NumericError("block maxima infeasible under the supplied margins");
  const PairList pairs = all_pairs(sites);

  std::vector<double> blocks;
  const Objective objective = [&](std::span<const double> phi) {
    const SmithDispersion theta = logchol_to_theta(phi);
    if (!step2_block_logliks_cached(theta, cache, pairs, blocks)) return kInf;
    return nll_from_blocks(blocks);
  };

  const SmithDispersion theta0 = init_theta ? *init_theta : default_init_theta(sites);
  const std::array<double, 3> phi0 = theta_to_logchol(theta0);
  if (!std::isfinite(objective(phi0)))
    throw NumericError("step-2 starting dispersion is infeasible for this data");
  NelderMeadResult nm = nelder_mead(objective, phi0, opts.nm);
  const SmithDispersion theta_hat = logchol_to_theta(nm.x);
  StageResult out;
  out.x = {theta_hat.sigma11, theta_hat.sigma12, theta_hat.sigma22};
  out.nll = nm.fmin;
  out.conv = stage_convergence(nm, objective);
  return out;
}

FitResult fit_two_step(const DailyPanel& panel, const BlockMaxima& maxima,
                       const ThresholdSpec& thresholds, const MarginalDesign& design,
                       const SiteCatalog& sites, std::span<const double> init_beta,
                       const SmithDispersion* init_theta, const FitOptions& opts) {
  const StageResult s1 = fit_step1(panel, thresholds, design, sites, init_beta, opts);
  const StageResult s2 = fit_step2(maxima, s1.x, sites, design, init_theta, opts);
  FitResult out;
  out.method = FitMethod::TwoStep;
  out.beta_hat = s1.x;
  out.theta_hat = SmithDispersion{s2.x[0], s2.x[1], s2.x[2]};
  out.nll_step1 = s1.nll;
  out.nll_step2 = s2.nll;
  out.convergence.converged = s1.conv.converged && s2.conv.converged;
  out.convergence.iterations = s1.conv.iterations + s2.conv.iterations;
  out.convergence.evaluations = s1.conv.evaluations + s2.conv.evaluations;
  out.convergence.grad_norm = std::max(s1.conv.grad_norm, s2.conv.grad_norm);
  out.convergence.note = !s1.conv.note.empty() ? s1.conv.note : s2.conv.note;
  out.parameter_layout = design.beta_names();
  out.parameter_layout.insert(out.parameter_layout.end(), {"sigma11", "sigma12", "sigma22"});
  return out;
}

FitResult fit_pairwise_onestep(const BlockMaxima& maxima, const MarginalDesign& design,
                               const SiteCatalog& sites, std::span<const double> init_beta,
                               const SmithDispersion* init_theta, const FitOptions& opts) {
  const int nb = design.n_beta();
  std::vector<double> init(init_beta.begin(), init_beta.end());
  if (init.empty()) init = default_init_beta(maxima, design);
  if (static_cast<int>(init.size()) != nb)
    throw DataError("initial beta length does not match the design");
  const SmithDispersion theta0 = init_theta ? *init_theta : default_init_theta(sites);
  const std::array<double, 3> phi0 = theta_to_logchol(theta0);

  std::vector<double> x0(init);
  x0.insert(x0.end(), phi0.begin(), phi0.end());

  const PairList pairs = all_pairs(sites);
  std::vector<GevParams> margins;
  FrechetCache cache;
  std::vector<double> blocks;
  const Objective objective = [&](std::span<const double> x) {
    const std::span<const double> beta = x.subspan(0, nb);
    if (!try_site_margins(sites, beta, design, margins)) return kInf;
    if (!margins_in_box(margins, opts)) return kInf;
    if (!build_frechet_cache(maxima, margins, cache)) return kInf;
    const SmithDispersion theta = logchol_to_theta(x.subspan(nb, 3));
    if (!step2_block_logliks_cached(theta, cache, pairs, blocks)) return kInf;
    return nll_from_blocks(blocks);
  };
  if (!std::isfinite(objective(x0)))
    throw NumericError(
        "pairwise starting point is infeasible; the data-driven default initialization is "
        "recommended");
  NelderMeadResult nm = nelder_mead(objective, x0, opts.nm);

  FitResult out;
  out.method = FitMethod::PairwiseOnestep;
  out.beta_hat.assign(nm.x.begin(), nm.x.begin() + nb);
  out.theta_hat = logchol_to_theta(std::span<const double>(nm.x).subspan(nb, 3));
  out.nll_step2 = nm.fmin;
  out.convergence = stage_convergence(nm, objective);
  try_site_margins(sites, out.beta_hat, design, margins);
  if (margins_on_boundary(margins, opts)) {
    out.convergence.converged = false;
    out.convergence.note = "xi estimate on the optimization box boundary";
  }
  out.parameter_layout = design.beta_names();
  out.parameter_layout.insert(out.parameter_layout.end(), {"sigma11", "sigma12", "sigma22"});
  return out;
}

}  // namespace spatmax
