#pragma once

#include <span>
#include <string>
#include <vector>

#include "spatmax/gev.hpp"

namespace spatmax {

/// Link function identifiers for the marginal regression. Only the identity
/// link is implemented; the enum exists so log links could be added without
/// changing the fitting interfaces.
enum class Link { Identity };

Link parse_link(const std::string& name);
std::string link_name(Link link);

/// Which entries of the per-site covariate vector enter each GEV parameter.
/// An intercept is always included and is not listed. Indices are 0-based
/// into Site::covariates.
struct MarginalDesign {
  std::vector<int> mu_covariates;
  std::vector<int> sigma_covariates;
  std::vector<int> xi_covariates;
  Link link_mu = Link::Identity;
  Link link_sigma = Link::Identity;
  Link link_xi = Link::Identity;

  int n_mu() const { return 1 + static_cast<int>(mu_covariates.size()); }
  int n_sigma() const { return 1 + static_cast<int>(sigma_covariates.size()); }
  int n_xi() const { return 1 + static_cast<int>(xi_covariates.size()); }
  /// Total length of beta, laid out as (beta_mu, beta_sigma, beta_xi).
  int n_beta() const { return n_mu() + n_sigma() + n_xi(); }

  /// Names in beta layout order: beta_mu_0, beta_mu_1, ..., beta_xi_0.
  std::vector<std::string> beta_names() const;
};

struct Site {
  std::string id;
  double x1 = 0.0;  // planar coordinates in consistent distance units
  double x2 = 0.0;
  std::vector<double> covariates;
};

struct SiteCatalog {
  std::vector<Site> sites;

  int size() const { return static_cast<int>(sites.size()); }
  /// Checks unique ids, finite coordinates, equal covariate lengths.
  void validate() const;
  int covariate_dim() const;
};

/// Regular k x k grid over [-5, 5]^2 with the coordinates also serving as
/// the two covariates. n_sites must be a perfect square.
SiteCatalog grid_catalog(int n_sites);

/// Evaluate the covariate links at one site: identity links give
/// mu_s = beta_mu[0] + sum_j beta_mu[j+1] * X[mu_covariates[j]], etc.
/// Throws NumericError("invalid marginal parameter ...") naming the site
/// when the implied sigma_s is not positive.
GevParams marginal_params_at_site(const std::vector<double>& covariates,
                                  std::span<const double> beta,
                                  const MarginalDesign& design,
                                  const std::string& site_id = {});

/// marginal_params_at_site for every site. The non-throwing variant returns
/// false on the first invalid margin instead (used inside optimizers).
std::vector<GevParams> site_margins(const SiteCatalog& sites, std::span<const double> beta,
                                    const MarginalDesign& design);
bool try_site_margins(const SiteCatalog& sites, std::span<const double> beta,
                      const MarginalDesign& design, std::vector<GevParams>& out);

}  // namespace spatmax
