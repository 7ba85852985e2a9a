#pragma once

#include "spatmax/gev.hpp"

namespace spatmax {

/// Dispersion matrix of the Smith storm profile, theta = (sigma11, sigma12, sigma22).
struct SmithDispersion {
  double sigma11 = 1.0;
  double sigma12 = 0.0;
  double sigma22 = 1.0;

  double det() const { return sigma11 * sigma22 - sigma12 * sigma12; }
  bool valid() const { return sigma11 > 0.0 && sigma22 > 0.0 && det() > 0.0; }
  double largest_eigenvalue() const;
};

/// Dependence metric a = sqrt(dx' Sigma^{-1} dx).
double mahalanobis_a(double dx1, double dx2, const SmithDispersion& sigma);

/// Smith bivariate CDF with unit Frechet margins,
/// F(z1, z2) = exp{-Phi(w1)/z1 - Phi(w2)/z2}, w1 = a/2 + log(z2/z1)/a, w2 = a - w1.
/// a below 1e-12 uses the complete-dependence limit exp(-1/min(z1,z2));
/// a above 38 the independence limit exp(-1/z1 - 1/z2).
double bivariate_cdf_frechet(double z1, double z2, double a);

/// Log of the bivariate Smith density d2F/dz1 dz2 with unit Frechet margins.
/// Returns -infinity when the density underflows; throws when a = 0
/// (mass degenerates onto the diagonal).
double log_bivariate_density_frechet(double z1, double z2, double a);

/// Log pairwise density of block maxima (m1, m2) with GEV margins p1, p2:
/// the Frechet-scale density plus the log Jacobians (1-xi) log z - log sigma.
double log_pairwise_density_gev(double m1, double m2, const GevParams& p1, const GevParams& p2,
                                double a);

/// Same density evaluated at precomputed Frechet-scale values; log_z1/log_z2
/// are log(z1)/log(z2). Hot path for the pairwise likelihood where the
/// marginal transform is fixed.
double log_pairwise_density_from_frechet(double z1, double z2, double log_z1, double log_z2,
                                         const GevParams& p1, const GevParams& p2, double a);

/// Pairwise extremal coefficient 2 Phi(a/2), between 1 (a=0) and 2 (a=inf).
double extremal_coefficient(double a);

}  // namespace spatmax
