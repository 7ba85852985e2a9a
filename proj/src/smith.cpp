#include "spatmax/smith.hpp"

#include <cmath>
#include <limits>

#include "spatmax/error.hpp"
#include "spatmax/mathutil.hpp"

namespace spatmax {

namespace {

constexpr double kDependentEps = 1e-12;
constexpr double kIndependentA = 38.0;

}  // namespace

double SmithDispersion::largest_eigenvalue() const {
  const double half_trace = 0.5 * (sigma11 + sigma22);
  const double disc = half_trace * half_trace - det();
  return half_trace + std::sqrt(std::max(disc, 0.0));
}

double mahalanobis_a(double dx1, double dx2, const SmithDispersion& sigma) {
  if (!sigma.valid()) throw NumericError("dispersion matrix is not positive definite");
  const double q =
      (sigma.sigma22 * dx1 * dx1 - 2.0 * sigma.sigma12 * dx1 * dx2 + sigma.sigma11 * dx2 * dx2) /
      sigma.det();
  return std::sqrt(std::max(q, 0.0));
}

double bivariate_cdf_frechet(double z1, double z2, double a) {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw NumericError("Frechet coordinates must be positive");
  if (a < kDependentEps) return std::exp(-1.0 / std::min(z1, z2));
  if (a > kIndependentA) return std::exp(-1.0 / z1 - 1.0 / z2);
  const double w1 = 0.5 * a + std::log(z2 / z1) / a;
  const double w2 = a - w1;
  return std::exp(-norm_cdf(w1) / z1 - norm_cdf(w2) / z2);
}

double log_bivariate_density_frechet(double z1, double z2, double a) {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw NumericError("Frechet coordinates must be positive");
  if (!(a > 0.0)) throw NumericError("density degenerate at a = 0");
  const double log_z1 = std::log(z1);
  const double log_z2 = std::log(z2);
  return log_pairwise_density_from_frechet(z1, z2, log_z1, log_z2, GevParams{1.0, 1.0, 1.0},
                                           GevParams{1.0, 1.0, 1.0}, a);
}

double log_pairwise_density_from_frechet(double z1, double z2, double log_z1, double log_z2,
                                         const GevParams& p1, const GevParams& p2, double a) {
  const double w1 = 0.5 * a + (log_z2 - log_z1) / a;
  const double w2 = a - w1;
  const double phi1 = norm_cdf(w1);
  const double phi2 = norm_cdf(w2);
  // V1 = -Phi(w1)/z1^2, V2 = -Phi(w2)/z2^2, V12 = -phi(w1)/(a z1^2 z2), so
  // f = F (V1 V2 - V12) and the bracket below is (V1 V2 - V12) z1^2 z2^2 / z2.
  const double bracket = phi1 * phi2 + z2 * norm_pdf(w1) / a;
  const double jac1 = (1.0 - p1.xi) * log_z1 - std::log(p1.sigma);
  const double jac2 = (1.0 - p2.xi) * log_z2 - std::log(p2.sigma);
  if (!(bracket > 0.0)) return -std::numeric_limits<double>::infinity();
  return -phi1 / z1 - phi2 / z2 + std::log(bracket) - 2.0 * log_z1 - 2.0 * log_z2 + jac1 + jac2;
}

double log_pairwise_density_gev(double m1, double m2, const GevParams& p1, const GevParams& p2,
                                double a) {
  if (!(a > 0.0)) throw NumericError("density degenerate at a = 0");
  const double z1 = gev_to_frechet(m1, p1);
  const double z2 = gev_to_frechet(m2, p2);
  return log_pairwise_density_from_frechet(z1, z2, std::log(z1), std::log(z2), p1, p2, a);
}

double extremal_coefficient(double a) { return 2.0 * norm_cdf(0.5 * a); }

}  // namespace spatmax
