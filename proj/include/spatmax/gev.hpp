#pragma once

#include <string>

namespace spatmax {

/// Shape values with |xi| below this use the exact Gumbel-limit formulas;
/// avoids catastrophic cancellation of (1+xi*w)^(1/xi) near xi = 0.
inline constexpr double kGumbelEps = 1e-8;

/// Location/scale/shape triple of a generalized extreme value distribution.
/// Support is {y : 1 + xi*(y-mu)/sigma > 0}.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  bool valid() const;
  /// True when y lies strictly inside the support.
  bool in_support(double y) const;
};

/// GEV distribution function. Returns 0 below / 1 above the support boundary
/// depending on the sign of xi. Throws on non-finite y or invalid parameters.
double gev_cdf(double y, const GevParams& p);

/// Inverse of gev_cdf on prob in (0,1).
double gev_quantile(double prob, const GevParams& p);

/// Probability integral transform onto the unit Frechet scale:
/// z = (1 + xi*(m-mu)/sigma)^(1/xi), so that gev_cdf(m) = exp(-1/z).
/// Throws SupportError (tagged with site_id when given) outside the support.
double gev_to_frechet(double m, const GevParams& p, const std::string& site_id = {});

/// Non-throwing variant; returns false (z untouched) outside the support.
bool try_gev_to_frechet(double m, const GevParams& p, double& z) noexcept;

/// Derivative dz/dm of gev_to_frechet: z^(1-xi)/sigma.
double frechet_jacobian(double m, const GevParams& p);

/// Inverse of gev_to_frechet: y = mu + sigma*(v^xi - 1)/xi for v > 0.
/// Maps a unit-Frechet value onto the GEV scale.
double apply_gev_margins(double v, const GevParams& p);

}  // namespace spatmax
