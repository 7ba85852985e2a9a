#include "spatmax/likelihood.hpp"

#include <cmath>
#include <limits>

#include "spatmax/error.hpp"
#include "spatmax/mathutil.hpp"

namespace spatmax {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Threshold-survival term -[1 + xi (u - mu)/sigma]^{-1/xi}; -inf when the
/// bracket is nonpositive.
double threshold_term(const GevParams& p, double u) {
  const double w = (u - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelEps) return -std::exp(-w);
  const double bracket = 1.0 + p.xi * w;
  if (!(bracket > 0.0)) return kNegInf;
  return -std::exp(-std::log1p(p.xi * w) / p.xi);
}

/// Point-process contribution of one exceedance y > u; -inf outside support.
double exceedance_term(const GevParams& p, double y, double log_sigma) {
  const double w = (y - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelEps) return -log_sigma - w;
  const double bracket = 1.0 + p.xi * w;
  if (!(bracket > 0.0)) return kNegInf;
  return -log_sigma - (1.0 / p.xi + 1.0) * std::log1p(p.xi * w);
}

}  // namespace

double step1_block_site_ll(std::span<const double> block_data, const GevParams& p, double u) {
  if (!p.valid()) return kNegInf;
  double total = threshold_term(p, u);
  if (total == kNegInf) return kNegInf;
  const double log_sigma = std::log(p.sigma);
  for (double y : block_data) {
    if (is_missing(y) || !(y > u)) continue;
    const double c = exceedance_term(p, y, log_sigma);
    if (c == kNegInf) return kNegInf;
    total += c;
  }
  return total;
}

Step1Workspace::Step1Workspace(const DailyPanel& panel, const ThresholdSpec& thresholds) {
  if (static_cast<int>(thresholds.u.size()) != panel.n_sites())
    throw DataError("threshold vector does not match the panel's site count");
  n_sites_ = panel.n_sites();
  n_blocks_ = panel.n_blocks;
  u_ = thresholds.u;
  quantile_level_ = thresholds.quantile_level;
  offsets_.assign(static_cast<std::size_t>(n_sites_) * n_blocks_ + 1, 0);
  std::size_t cell = 0;
  for (int s = 0; s < n_sites_; ++s) {
    const double u = u_[s];
    for (int t = 0; t < n_blocks_; ++t, ++cell) {
      offsets_[cell] = exceedances_.size();
      for (int k = 0; k < panel.block_size; ++k) {
        const double y = panel.at(s, t, k);
        if (!is_missing(y) && y > u) exceedances_.push_back(y);
      }
    }
  }
  offsets_.back() = exceedances_.size();
}

double Step1Workspace::block_site_ll(int s, int t, const GevParams& p) const {
  if (!p.valid()) return kNegInf;
  double total = threshold_term(p, u_[s]);
  if (total == kNegInf) return kNegInf;
  const double log_sigma = std::log(p.sigma);
  const std::size_t cell = static_cast<std::size_t>(s) * n_blocks_ + t;
  for (std::size_t i = offsets_[cell]; i < offsets_[cell + 1]; ++i) {
    const double c = exceedance_term(p, exceedances_[i], log_sigma);
    if (c == kNegInf) return kNegInf;
    total += c;
  }
  return total;
}

bool step1_block_logliks(std::span<const double> beta, const Step1Workspace& ws,
                         const MarginalDesign& design, const SiteCatalog& sites,
                         std::vector<double>& out) {
  if (static_cast<int>(sites.size()) != ws.n_sites())
    throw DataError("site catalog does not match the workspace");
  static thread_local std::vector<GevParams> margins;
  if (!try_site_margins(sites, beta, design, margins)) return false;
  out.assign(ws.n_blocks(), 0.0);
  for (int t = 0; t < ws.n_blocks(); ++t) {
    double acc = 0.0;
    for (int s = 0; s < ws.n_sites(); ++s) {
      const double v = ws.block_site_ll(s, t, margins[s]);
      if (v == kNegInf) return false;
      acc += v;
    }
    out[t] = acc;
  }
  return true;
}

double step1_nll(std::span<const double> beta, const Step1Workspace& ws,
                 const MarginalDesign& design, const SiteCatalog& sites) {
  static thread_local std::vector<double> blocks;
  if (!step1_block_logliks(beta, ws, design, sites, blocks)) return kPosInf;
  KahanSum sum;
  for (double v : blocks) sum.add(v);
  return -sum.value();
}

double step1_nll(std::span<const double> beta, const DailyPanel& panel,
                 const ThresholdSpec& thresholds, const MarginalDesign& design,
                 const SiteCatalog& sites) {
  Step1Workspace ws(panel, thresholds);
  return step1_nll(beta, ws, design, sites);
}

PairList all_pairs(const SiteCatalog& sites) {
  PairList pairs;
  const int S = static_cast<int>(sites.size());
  const int P = S * (S - 1) / 2;
  pairs.first.reserve(P);
  pairs.second.reserve(P);
  pairs.dx1.reserve(P);
  pairs.dx2.reserve(P);
  for (int i = 0; i < S; ++i) {
    for (int j = i + 1; j < S; ++j) {
      pairs.first.push_back(i);
      pairs.second.push_back(j);
      pairs.dx1.push_back(sites.sites[i].x1 - sites.sites[j].x1);
      pairs.dx2.push_back(sites.sites[i].x2 - sites.sites[j].x2);
    }
  }
  return pairs;
}

bool build_frechet_cache(const BlockMaxima& maxima, const std::vector<GevParams>& margins,
                         FrechetCache& cache) {
  cache.n_sites = maxima.n_sites();
  cache.n_blocks = maxima.n_blocks;
  cache.margins = margins;
  const std::size_t total = static_cast<std::size_t>(cache.n_sites) * cache.n_blocks;
  cache.z.assign(total, kMissing);
  cache.log_z.assign(total, kMissing);
  for (int s = 0; s < cache.n_sites; ++s) {
    for (int t = 0; t < cache.n_blocks; ++t) {
      const double m = maxima.at(s, t);
      if (is_missing(m)) continue;
      double z = 0.0;
      if (!try_gev_to_frechet(m, margins[s], z)) return false;
      const std::size_t i = cache.index(s, t);
      cache.z[i] = z;
      cache.log_z[i] = std::log(z);
    }
  }
  return true;
}

bool step2_block_logliks_cached(const SmithDispersion& theta, const FrechetCache& cache,
                                const PairList& pairs, std::vector<double>& out) {
  if (!theta.valid()) return false;
  const int P = pairs.size();
  static thread_local std::vector<double> a;
  a.resize(P);
  for (int p = 0; p < P; ++p) {
    a[p] = mahalanobis_a(pairs.dx1[p], pairs.dx2[p], theta);
    if (!(a[p] > 0.0)) return false;
  }
  out.assign(cache.n_blocks, 0.0);
  for (int t = 0; t < cache.n_blocks; ++t) {
    double acc = 0.0;
    for (int p = 0; p < P; ++p) {
      const int i = pairs.first[p];
      const int j = pairs.second[p];
      const std::size_t ci = cache.index(i, t);
      const std::size_t cj = cache.index(j, t);
      const double zi = cache.z[ci];
      const double zj = cache.z[cj];
      if (is_missing(zi) || is_missing(zj)) continue;
      const double v = log_pairwise_density_from_frechet(zi, zj, cache.log_z[ci], cache.log_z[cj],
                                                         cache.margins[i], cache.margins[j], a[p]);
      if (!std::isfinite(v)) return false;
      acc += v;
    }
    out[t] = acc;
  }
  return true;
}

bool step2_block_logliks(const SmithDispersion& theta, std::span<const double> beta,
                         const BlockMaxima& maxima, const SiteCatalog& sites,
                         const MarginalDesign& design, std::vector<double>& out) {
  if (static_cast<int>(sites.size()) != maxima.n_sites())
    throw DataError("site catalog does not match the block maxima");
  static thread_local std::vector<GevParams> margins;
  if (!try_site_margins(sites, beta, design, margins)) return false;
  static thread_local FrechetCache cache;
  if (!build_frechet_cache(maxima, margins, cache)) return false;
  const PairList pairs = all_pairs(sites);
  return step2_block_logliks_cached(theta, cache, pairs, out);
}

double step2_nll(const SmithDispersion& theta, std::span<const double> beta,
                 const BlockMaxima& maxima, const SiteCatalog& sites,
                 const MarginalDesign& design) {
  static thread_local std::vector<double> blocks;
  if (!step2_block_logliks(theta, beta, maxima, sites, design, blocks)) return kPosInf;
  KahanSum sum;
  for (double v : blocks) sum.add(v);
  return -sum.value();
}

namespace {

double score_step(double x) { return kScoreStep * std::max(1.0, std::abs(x)); }

SmithDispersion theta_from(const double* v) { return SmithDispersion{v[0], v[1], v[2]}; }

[[noreturn]] void score_failure() {
  throw NumericError(
      "score evaluation infeasible near the fitted point; the fit may sit on a support or "
      "positive-definiteness boundary");
}

}  // namespace

namespace {

BlockScores block_scores_impl(std::span<const double> beta, const SmithDispersion& theta,
                              const Step1Workspace* ws, const BlockMaxima& maxima,
                              const MarginalDesign& design, const SiteCatalog& sites) {
  BlockScores out;
  out.n_blocks = maxima.n_blocks;
  out.dim_beta = design.n_beta();
  out.dim_theta = 3;
  const int n = out.n_blocks;
  out.psi1.assign(static_cast<std::size_t>(n) * out.dim_beta, 0.0);
  out.psi2.assign(static_cast<std::size_t>(n) * out.dim_theta, 0.0);
  out.phi2.assign(static_cast<std::size_t>(n) * out.dim_beta, 0.0);

  std::vector<double> b(beta.begin(), beta.end());
  std::vector<double> lp, lm;
  if (ws != nullptr) {
    if (ws->n_blocks() != n) throw DataError("workspace and maxima disagree on block count");
    for (int j = 0; j < out.dim_beta; ++j) {
      const double h = score_step(b[j]);
      const double bj = b[j];
      b[j] = bj + h;
      const bool okp = step1_block_logliks(b, *ws, design, sites, lp);
      b[j] = bj - h;
      const bool okm = step1_block_logliks(b, *ws, design, sites, lm);
      b[j] = bj;
      if (!okp || !okm) score_failure();
      for (int t = 0; t < n; ++t)
        out.psi1[static_cast<std::size_t>(t) * out.dim_beta + j] = (lp[t] - lm[t]) / (2.0 * h);
    }
  }

  for (int j = 0; j < out.dim_beta; ++j) {
    const double h = score_step(b[j]);
    const double bj = b[j];
    b[j] = bj + h;
    const bool okp = step2_block_logliks(theta, b, maxima, sites, design, lp);
    b[j] = bj - h;
    const bool okm = step2_block_logliks(theta, b, maxima, sites, design, lm);
    b[j] = bj;
    if (!okp || !okm) score_failure();
    for (int t = 0; t < n; ++t)
      out.phi2[static_cast<std::size_t>(t) * out.dim_beta + j] = (lp[t] - lm[t]) / (2.0 * h);
  }

  double tv[3] = {theta.sigma11, theta.sigma12, theta.sigma22};
  std::vector<GevParams> margins;
  if (!try_site_margins(sites, beta, design, margins)) score_failure();
  FrechetCache cache;
  if (!build_frechet_cache(maxima, margins, cache)) score_failure();
  const PairList pairs = all_pairs(sites);
  for (int j = 0; j < 3; ++j) {
    const double h = score_step(tv[j]);
    const double tj = tv[j];
    tv[j] = tj + h;
    const bool okp = step2_block_logliks_cached(theta_from(tv), cache, pairs, lp);
    tv[j] = tj - h;
    const bool okm = step2_block_logliks_cached(theta_from(tv), cache, pairs, lm);
    tv[j] = tj;
    if (!okp || !okm) score_failure();
    for (int t = 0; t < n; ++t)
      out.psi2[static_cast<std::size_t>(t) * out.dim_theta + j] = (lp[t] - lm[t]) / (2.0 * h);
  }
  return out;
}

}  // namespace

BlockScores block_scores(std::span<const double> beta, const SmithDispersion& theta,
                         const Step1Workspace& ws, const BlockMaxima& maxima,
                         const MarginalDesign& design, const SiteCatalog& sites) {
  return block_scores_impl(beta, theta, &ws, maxima, design, sites);
}

BlockScores block_scores_step2_only(std::span<const double> beta, const SmithDispersion& theta,
                                    const BlockMaxima& maxima, const MarginalDesign& design,
                                    const SiteCatalog& sites) {
  return block_scores_impl(beta, theta, nullptr, maxima, design, sites);
}

namespace {

/// Per-(block, site) Step-1 loglikelihood matrix, layout (t * S + s).
bool step1_ll_matrix(std::span<const double> beta, const Step1Workspace& ws,
                     const MarginalDesign& design, const SiteCatalog& sites,
                     std::vector<double>& out) {
  static thread_local std::vector<GevParams> margins;
  if (!try_site_margins(sites, beta, design, margins)) return false;
  const int S = ws.n_sites();
  const int n = ws.n_blocks();
  out.assign(static_cast<std::size_t>(n) * S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < n; ++t) {
      const double v = ws.block_site_ll(s, t, margins[s]);
      if (v == kNegInf) return false;
      out[static_cast<std::size_t>(t) * S + s] = v;
    }
  }
  return true;
}

/// Per-(block, pair) Step-2 log pairwise densities, layout (t * P + p);
/// missing pairs stay zero.
bool step2_ll_matrix(const SmithDispersion& theta, const FrechetCache& cache,
                     const PairList& pairs, std::vector<double>& out) {
  if (!theta.valid()) return false;
  const int P = pairs.size();
  const int n = cache.n_blocks;
  static thread_local std::vector<double> a;
  a.resize(P);
  for (int p = 0; p < P; ++p) {
    a[p] = mahalanobis_a(pairs.dx1[p], pairs.dx2[p], theta);
    if (!(a[p] > 0.0)) return false;
  }
  out.assign(static_cast<std::size_t>(n) * P, 0.0);
  for (int t = 0; t < n; ++t) {
    for (int p = 0; p < P; ++p) {
      const int i = pairs.first[p];
      const int j = pairs.second[p];
      const std::size_t ci = cache.index(i, t);
      const std::size_t cj = cache.index(j, t);
      const double zi = cache.z[ci];
      const double zj = cache.z[cj];
      if (is_missing(zi) || is_missing(zj)) continue;
      const double v = log_pairwise_density_from_frechet(zi, zj, cache.log_z[ci], cache.log_z[cj],
                                                         cache.margins[i], cache.margins[j], a[p]);
      if (!std::isfinite(v)) return false;
      out[static_cast<std::size_t>(t) * P + p] = v;
    }
  }
  return true;
}

bool step2_ll_matrix_at_beta(const SmithDispersion& theta, std::span<const double> beta,
                             const BlockMaxima& maxima, const SiteCatalog& sites,
                             const MarginalDesign& design, const PairList& pairs,
                             std::vector<double>& out) {
  static thread_local std::vector<GevParams> margins;
  if (!try_site_margins(sites, beta, design, margins)) return false;
  static thread_local FrechetCache cache;
  if (!build_frechet_cache(maxima, margins, cache)) return false;
  return step2_ll_matrix(theta, cache, pairs, out);
}

}  // namespace

namespace {

DetailScores detail_scores_impl(std::span<const double> beta, const SmithDispersion& theta,
                                const Step1Workspace* ws, const BlockMaxima& maxima,
                                const MarginalDesign& design, const SiteCatalog& sites) {
  DetailScores out;
  out.n_blocks = maxima.n_blocks;
  out.n_sites = maxima.n_sites();
  out.dim_beta = design.n_beta();
  out.dim_theta = 3;
  const PairList pairs = all_pairs(sites);
  out.n_pairs = pairs.size();
  const std::size_t n_ts = static_cast<std::size_t>(out.n_blocks) * out.n_sites;
  const std::size_t n_tp = static_cast<std::size_t>(out.n_blocks) * out.n_pairs;
  out.psi1_site.assign(n_ts * out.dim_beta, 0.0);
  out.psi2_pair.assign(n_tp * out.dim_theta, 0.0);
  out.phi2_pair.assign(n_tp * out.dim_beta, 0.0);

  std::vector<double> b(beta.begin(), beta.end());
  std::vector<double> lp, lm;
  if (ws != nullptr) {
    if (ws->n_blocks() != out.n_blocks)
      throw DataError("workspace and maxima disagree on block count");
    for (int j = 0; j < out.dim_beta; ++j) {
      const double h = score_step(b[j]);
      const double bj = b[j];
      b[j] = bj + h;
      const bool okp = step1_ll_matrix(b, *ws, design, sites, lp);
      b[j] = bj - h;
      const bool okm = step1_ll_matrix(b, *ws, design, sites, lm);
      b[j] = bj;
      if (!okp || !okm) score_failure();
      for (std::size_t c = 0; c < n_ts; ++c)
        out.psi1_site[c * out.dim_beta + j] = (lp[c] - lm[c]) / (2.0 * h);
    }
  }

  for (int j = 0; j < out.dim_beta; ++j) {
    const double h = score_step(b[j]);
    const double bj = b[j];
    b[j] = bj + h;
    const bool okp = step2_ll_matrix_at_beta(theta, b, maxima, sites, design, pairs, lp);
    b[j] = bj - h;
    const bool okm = step2_ll_matrix_at_beta(theta, b, maxima, sites, design, pairs, lm);
    b[j] = bj;
    if (!okp || !okm) score_failure();
    for (std::size_t c = 0; c < n_tp; ++c)
      out.phi2_pair[c * out.dim_beta + j] = (lp[c] - lm[c]) / (2.0 * h);
  }

  double tv[3] = {theta.sigma11, theta.sigma12, theta.sigma22};
  std::vector<GevParams> margins;
  if (!try_site_margins(sites, beta, design, margins)) score_failure();
  FrechetCache cache;
  if (!build_frechet_cache(maxima, margins, cache)) score_failure();
  for (int j = 0; j < 3; ++j) {
    const double h = score_step(tv[j]);
    const double tj = tv[j];
    tv[j] = tj + h;
    const bool okp = step2_ll_matrix(theta_from(tv), cache, pairs, lp);
    tv[j] = tj - h;
    const bool okm = step2_ll_matrix(theta_from(tv), cache, pairs, lm);
    tv[j] = tj;
    if (!okp || !okm) score_failure();
    for (std::size_t c = 0; c < n_tp; ++c)
      out.psi2_pair[c * out.dim_theta + j] = (lp[c] - lm[c]) / (2.0 * h);
  }
  return out;
}

}  // namespace

DetailScores detail_scores(std::span<const double> beta, const SmithDispersion& theta,
                           const Step1Workspace& ws, const BlockMaxima& maxima,
                           const MarginalDesign& design, const SiteCatalog& sites) {
  return detail_scores_impl(beta, theta, &ws, maxima, design, sites);
}

DetailScores detail_scores_step2_only(std::span<const double> beta, const SmithDispersion& theta,
                                      const BlockMaxima& maxima, const MarginalDesign& design,
                                      const SiteCatalog& sites) {
  return detail_scores_impl(beta, theta, nullptr, maxima, design, sites);
}

}  // namespace spatmax
