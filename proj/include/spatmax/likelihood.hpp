#pragma once

#include <span>
#include <vector>

#include "spatmax/design.hpp"
#include "spatmax/panel.hpp"
#include "spatmax/smith.hpp"

namespace spatmax {

struct ThresholdSpec {
  std::vector<double> u;
  double quantile_level = 0.95;
};

/// Point-process loglikelihood of one block at one site:
///   -[1 + xi (u - mu)/sigma]^{-1/xi}
///   + sum over days with Y > u of { -log sigma - (1/xi + 1) log[1 + xi (Y - mu)/sigma] }.
/// Missing days contribute nothing. Support violations return -infinity
/// instead of throwing so optimizers can reject the point.
double step1_block_site_ll(std::span<const double> block_data, const GevParams& p, double u);

/// Caches per-(site, block) exceedance values and observed-day counts; the
/// exceedance set depends only on data and thresholds, not on parameters.
class Step1Workspace {
 public:
  Step1Workspace(const DailyPanel& panel, const ThresholdSpec& thresholds);

  int n_sites() const { return n_sites_; }
  int n_blocks() const { return n_blocks_; }
  double threshold(int s) const { return u_[s]; }
  double quantile_level() const { return quantile_level_; }

  /// Same value as step1_block_site_ll on the underlying block data.
  double block_site_ll(int s, int t, const GevParams& p) const;

 private:
  int n_sites_ = 0;
  int n_blocks_ = 0;
  std::vector<double> u_;
  double quantile_level_ = 0.95;
  std::vector<double> exceedances_;
  std::vector<std::size_t> offsets_;
};

/// Per-block loglikelihoods l_{1t} = sum_s l_{1t,s}. Returns false when any
/// site's margins are invalid or a support violation occurs.
bool step1_block_logliks(std::span<const double> beta, const Step1Workspace& ws,
                         const MarginalDesign& design, const SiteCatalog& sites,
                         std::vector<double>& out);

/// -sum_t l_{1t}; +infinity on any infeasibility.
double step1_nll(std::span<const double> beta, const Step1Workspace& ws,
                 const MarginalDesign& design, const SiteCatalog& sites);
double step1_nll(std::span<const double> beta, const DailyPanel& panel,
                 const ThresholdSpec& thresholds, const MarginalDesign& design,
                 const SiteCatalog& sites);

/// All unordered site pairs in lexicographic (i, j) order with their
/// coordinate differences.
struct PairList {
  std::vector<int> first;
  std::vector<int> second;
  std::vector<double> dx1;
  std::vector<double> dx2;
  int size() const { return static_cast<int>(first.size()); }
};
PairList all_pairs(const SiteCatalog& sites);

/// Frechet-transformed block maxima under fixed margins; NaN rows mark
/// missing maxima. Building fails (returns false) when an observed maximum
/// falls outside its site's GEV support.
struct FrechetCache {
  std::vector<double> z;
  std::vector<double> log_z;
  std::vector<GevParams> margins;
  int n_sites = 0;
  int n_blocks = 0;
  std::size_t index(int s, int t) const { return static_cast<std::size_t>(s) * n_blocks + t; }
};
bool build_frechet_cache(const BlockMaxima& maxima, const std::vector<GevParams>& margins,
                         FrechetCache& cache);

/// Per-block pairwise loglikelihoods l_{2t} = sum_{i<j} log f(M_i, M_j).
/// Returns false on infeasibility (non-SPD theta, invalid margins, support
/// violation, coincident sites).
bool step2_block_logliks(const SmithDispersion& theta, std::span<const double> beta,
                         const BlockMaxima& maxima, const SiteCatalog& sites,
                         const MarginalDesign& design, std::vector<double>& out);
bool step2_block_logliks_cached(const SmithDispersion& theta, const FrechetCache& cache,
                                const PairList& pairs, std::vector<double>& out);

/// -sum_t l_{2t}; +infinity on any infeasibility.
double step2_nll(const SmithDispersion& theta, std::span<const double> beta,
                 const BlockMaxima& maxima, const SiteCatalog& sites,
                 const MarginalDesign& design);

/// Per-block score vectors at (beta, theta): psi1[t] = dl_{1t}/dbeta,
/// psi2[t] = dl_{2t}/dtheta, phi2[t] = dl_{2t}/dbeta, central differences
/// with step 1e-6 max(1, |x|).
struct BlockScores {
  int n_blocks = 0;
  int dim_beta = 0;
  int dim_theta = 3;
  std::vector<double> psi1;
  std::vector<double> psi2;
  std::vector<double> phi2;

  std::span<const double> psi1_row(int t) const {
    return {psi1.data() + static_cast<std::size_t>(t) * dim_beta,
            static_cast<std::size_t>(dim_beta)};
  }
  std::span<const double> psi2_row(int t) const {
    return {psi2.data() + static_cast<std::size_t>(t) * dim_theta,
            static_cast<std::size_t>(dim_theta)};
  }
  std::span<const double> phi2_row(int t) const {
    return {phi2.data() + static_cast<std::size_t>(t) * dim_beta,
            static_cast<std::size_t>(dim_beta)};
  }
};
BlockScores block_scores(std::span<const double> beta, const SmithDispersion& theta,
                         const Step1Workspace& ws, const BlockMaxima& maxima,
                         const MarginalDesign& design, const SiteCatalog& sites);

/// Step-2 scores only (psi2, phi2); psi1 stays zero. Used for the one-step
/// pairwise method, where no daily panel exists.
BlockScores block_scores_step2_only(std::span<const double> beta, const SmithDispersion& theta,
                                    const BlockMaxima& maxima, const MarginalDesign& design,
                                    const SiteCatalog& sites);

/// Finer-grained scores for the Bartlett information estimator: per-(block,
/// site) Step-1 scores and per-(block, pair) Step-2 scores.
struct DetailScores {
  int n_blocks = 0;
  int n_sites = 0;
  int n_pairs = 0;
  int dim_beta = 0;
  int dim_theta = 3;
  std::vector<double> psi1_site;
  std::vector<double> psi2_pair;
  std::vector<double> phi2_pair;

  std::span<const double> psi1_at(int t, int s) const {
    return {psi1_site.data() + (static_cast<std::size_t>(t) * n_sites + s) * dim_beta,
            static_cast<std::size_t>(dim_beta)};
  }
  std::span<const double> psi2_at(int t, int p) const {
    return {psi2_pair.data() + (static_cast<std::size_t>(t) * n_pairs + p) * dim_theta,
            static_cast<std::size_t>(dim_theta)};
  }
  std::span<const double> phi2_at(int t, int p) const {
    return {phi2_pair.data() + (static_cast<std::size_t>(t) * n_pairs + p) * dim_beta,
            static_cast<std::size_t>(dim_beta)};
  }
};
DetailScores detail_scores(std::span<const double> beta, const SmithDispersion& theta,
                           const Step1Workspace& ws, const BlockMaxima& maxima,
                           const MarginalDesign& design, const SiteCatalog& sites);

/// Per-pair scores only; psi1_site stays zero.
DetailScores detail_scores_step2_only(std::span<const double> beta, const SmithDispersion& theta,
                                      const BlockMaxima& maxima, const MarginalDesign& design,
                                      const SiteCatalog& sites);

inline constexpr double kScoreStep = 1e-6;

}  // namespace spatmax
