#pragma once

#include <Eigen/Dense>
#include <string>

#include "spatmax/fit.hpp"
#include "spatmax/likelihood.hpp"

namespace spatmax {

enum class AVariant { FD, Bartlett };

std::string a_variant_name(AVariant v);
AVariant parse_a_variant(const std::string& name);

struct GodambeResult {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd omega;
  std::vector<double> se;
  AVariant variant = AVariant::FD;
  int n_blocks = 0;
  double cond_A = 0.0;
};

/// B_n = n^{-1} sum_t psi_t psi_t' with the two-step score psi_t = (psi1_t; psi2_t).
Eigen::MatrixXd estimate_B(const BlockScores& scores);

/// A_n = n^{-1} sum_t d(psi_t)/d(eta'), central differences of the score
/// functions with step 1e-4 max(1, |x|); the (beta rows, theta columns)
/// block is structurally zero for the two-step estimator.
Eigen::MatrixXd estimate_A_fd(std::span<const double> beta, const SmithDispersion& theta,
                              const Step1Workspace& ws, const BlockMaxima& maxima,
                              const MarginalDesign& design, const SiteCatalog& sites);

/// First-derivative estimate of A via the second Bartlett identity:
/// blockwise -n^{-1} sums of per-site and per-pair score outer products.
Eigen::MatrixXd estimate_A_bartlett(const DetailScores& scores);

/// One-step pairwise analogues; the score is dl_{2t}/d(beta, theta) and A has
/// no structural zero block.
Eigen::MatrixXd estimate_B_onestep(const BlockScores& scores);
Eigen::MatrixXd estimate_A_fd_onestep(std::span<const double> beta, const SmithDispersion& theta,
                                      const BlockMaxima& maxima, const MarginalDesign& design,
                                      const SiteCatalog& sites);
Eigen::MatrixXd estimate_A_bartlett_onestep(const DetailScores& scores);

/// omega = A^{-1} B A^{-T} (symmetrized), se_i = sqrt(omega_ii / n).
/// Errors when cond(A) exceeds 1e12.
GodambeResult sandwich(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int n_blocks,
                       AVariant variant);

/// End-to-end driver matching the fit method; ws may be null only for
/// PAIRWISE_ONESTEP fits.
GodambeResult godambe_variance(const FitResult& fit, const Step1Workspace* ws,
                               const BlockMaxima& maxima, const MarginalDesign& design,
                               const SiteCatalog& sites, AVariant variant);

}  // namespace spatmax
