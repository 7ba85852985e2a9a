#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spatmax/likelihood.hpp"
#include "spatmax/optim.hpp"

namespace spatmax {

enum class FitMethod { TwoStep, PairwiseOnestep };

std::string method_name(FitMethod m);
FitMethod parse_method(const std::string& name);

struct FitOptions {
  NelderMeadOptions nm;
  double xi_lower = -0.5;
  double xi_upper = 1.0;
  double boundary_tol = 1e-3;
};

struct Convergence {
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct FitResult {
  FitMethod method = FitMethod::TwoStep;
  std::vector<double> beta_hat;
  SmithDispersion theta_hat;
  double nll_step1 = std::numeric_limits<double>::quiet_NaN();
  double nll_step2 = std::numeric_limits<double>::quiet_NaN();
  Convergence convergence;
  std::vector<std::string> parameter_layout;

  /// eta = (beta, sigma11, sigma12, sigma22).
  std::vector<double> eta_hat() const;
};

/// Result of one optimization stage; x is beta for step 1 and
/// (sigma11, sigma12, sigma22) for step 2.
struct StageResult {
  std::vector<double> x;
  double nll = 0.0;
  Convergence conv;
};

/// Deterministic data-driven starting values: GEV intercepts from pooled
/// block-maxima moments (median, IQR/1.35, xi = 0.1), slopes zero; dispersion
/// from the squared mean nearest-neighbor distance.
std::vector<double> default_init_beta(const BlockMaxima& maxima, const MarginalDesign& design);
std::vector<double> default_init_beta(const DailyPanel& panel, const MarginalDesign& design);
SmithDispersion default_init_theta(const SiteCatalog& sites);

/// Log-Cholesky coordinates phi = (log L11, L21, log L22) of the dispersion;
/// the optimizer works in phi so every iterate is positive definite.
std::array<double, 3> theta_to_logchol(const SmithDispersion& theta);
SmithDispersion logchol_to_theta(std::span<const double> phi);

StageResult fit_step1(const DailyPanel& panel, const ThresholdSpec& thresholds,
                      const MarginalDesign& design, const SiteCatalog& sites,
                      std::span<const double> init_beta = {}, const FitOptions& opts = {});
StageResult fit_step1(const Step1Workspace& ws, const MarginalDesign& design,
                      const SiteCatalog& sites, std::span<const double> init_beta,
                      const FitOptions& opts);

StageResult fit_step2(const BlockMaxima& maxima, std::span<const double> beta_hat,
                      const SiteCatalog& sites, const MarginalDesign& design,
                      const SmithDispersion* init_theta = nullptr, const FitOptions& opts = {});

FitResult fit_two_step(const DailyPanel& panel, const BlockMaxima& maxima,
                       const ThresholdSpec& thresholds, const MarginalDesign& design,
                       const SiteCatalog& sites, std::span<const double> init_beta = {},
                       const SmithDispersion* init_theta = nullptr, const FitOptions& opts = {});

FitResult fit_pairwise_onestep(const BlockMaxima& maxima, const MarginalDesign& design,
                               const SiteCatalog& sites, std::span<const double> init_beta = {},
                               const SmithDispersion* init_theta = nullptr,
                               const FitOptions& opts = {});

}  // namespace spatmax
